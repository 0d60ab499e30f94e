#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "embodepth/camera.hpp"
#include "embodepth/language.hpp"
#include "embodepth/scene_depth.hpp"
#include "embodepth/segmentation.hpp"

// Array-in/array-out entry points for embedding the pipeline in other
// runtimes. Inputs are row-major contiguous buffers; outputs use the same
// float encoding as the .f32 files (0 = invalid, +inf = sky).
namespace embodepth::bridge {

std::string_view version();

struct StageArrays {
  int width = 0;
  int height = 0;
  // Indexed like kAllStages.
  std::array<std::vector<float>, 5> values;
  std::array<std::vector<std::uint8_t>, 5> states;  // PixelState
};

// seg must hold exactly width*height labels; otherwise kShapeMismatch.
StageArrays compute(const CameraRig& rig, std::span<const std::uint16_t> seg, int width,
                    int height, const ClassTable& table, const PipelineOptions& options = {});

// Same JSON as `embodepth describe`. scene uses the .f32 encoding.
nlohmann::json describe(std::span<const float> scene, std::span<const std::uint16_t> instances,
                        std::span<const std::uint16_t> seg, int width, int height,
                        const ClassTable& table, const std::vector<std::string>& captions,
                        const ObjectDepthOptions& options = {});

// Helpers shared with the CLI.
DepthMap depth_from_encoded(std::span<const float> values, int width, int height);
SegmentationMap seg_from_array(std::span<const std::uint16_t> seg, int width, int height,
                               const ClassTable& table);

}  // namespace embodepth::bridge
