#pragma once

#include <array>
#include <cstddef>
#include <string_view>

#include "embodepth/camera.hpp"
#include "embodepth/depth_map.hpp"
#include "embodepth/segmentation.hpp"

namespace embodepth {

enum class Stage { kSurface, kRoad, kGround, kExtendedGround, kScene };

inline constexpr std::array<Stage, 5> kAllStages = {Stage::kSurface, Stage::kRoad, Stage::kGround,
                                                    Stage::kExtendedGround, Stage::kScene};

std::string_view to_string(Stage stage);
Stage parse_stage(std::string_view text);

struct EmbodiedDepthBundle {
  DepthMap surface;
  DepthMap road;
  DepthMap ground;
  DepthMap extended_ground;
  DepthMap scene;

  const DepthMap& stage(Stage s) const;

  friend bool operator==(const EmbodiedDepthBundle&, const EmbodiedDepthBundle&) = default;
};

// Keeps surface values where the mask is set; everything else is invalid.
DepthMap road_depth(const DepthMap& surface, const Mask& road_mask);
DepthMap ground_depth(const DepthMap& surface, const Mask& ground_mask);

// Copies ground depth upward through each column's runs of VERTICAL pixels.
// A run is a maximal vertical stretch of one VERTICAL label. Its depth comes
// from the pixel just below its lowest row: a valid ground pixel, or else a
// VERTICAL run that already received a depth (objects resting on objects).
// Unsupported runs stay invalid. Valid input pixels are never changed.
DepthMap extend_vertical(const DepthMap& ground, const SegmentationMap& seg,
                         const ClassTable& table);

// Flags SKY pixels and inpaints every other invalid pixel.
DepthMap compose_scene(const DepthMap& extended, const SegmentationMap& seg,
                       const ClassTable& table, int radius);

struct PipelineOptions {
  int inpaint_radius = 5;
};

// surface -> road -> ground -> extended ground -> scene. Errors carry the
// failing stage's name.
EmbodiedDepthBundle run_pipeline(const CameraRig& rig, const SegmentationMap& seg,
                                 const ClassTable& table, const PipelineOptions& options = {});

// Counts pixels breaking road <= ground <= extended <= scene minus sky, or
// whose value changes between a stage and any later one.
std::size_t count_nesting_violations(const EmbodiedDepthBundle& bundle);

}  // namespace embodepth
