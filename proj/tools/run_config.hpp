#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "embodepth/camera.hpp"
#include "embodepth/language.hpp"
#include "embodepth/metrics.hpp"
#include "embodepth/scene_depth.hpp"
#include "embodepth/segmentation.hpp"

namespace embodepth::cli {

enum class OutputFormat { kPng16, kF32, kBoth };

std::string_view to_string(OutputFormat f);
OutputFormat parse_output_format(std::string_view text);

// Everything a subcommand needs. Serialized into run manifests so a run can
// be repeated with `--config manifest.json`.
struct RunConfig {
  std::string camera;   // camera config, or calib_cam_to_cam.txt with dataset = kitti
  std::string classes;  // empty = built-in Cityscapes table
  std::string dataset;  // "" or "kitti"
  double camera_height_m = 1.65;  // kitti only

  std::string seg_dir;
  std::string instance_dir;
  std::string output_dir;
  std::string pred_dir;
  std::string gt_dir;

  std::string scene;
  std::string instances;
  std::string seg;
  std::string captions;
  std::string output;

  std::vector<Stage> stages{kAllStages.begin(), kAllStages.end()};
  std::optional<DepthMode> depth_mode;  // overrides the camera config
  int inpaint_radius = 5;

  double min_depth = 1e-3;
  double max_depth = 80.0;
  bool garg_crop = false;
  bool median_scaling = false;
  bool group_by_date = false;

  std::size_t min_pixels = 50;
  DepthAggregation aggregation = DepthAggregation::kMedian;

  OutputFormat format = OutputFormat::kPng16;
};

nlohmann::json to_json(const RunConfig& c);
// Unknown keys are a kConfig error. A run manifest (an object with a
// "config" member) is accepted in place of a bare config.
RunConfig config_from_json(const nlohmann::json& j);
RunConfig load_run_config(const std::string& path);

ClassTable load_table(const RunConfig& c);
CameraRig load_rig(const RunConfig& c);

// Throws kConfig when a required field is empty, kIo when a referenced input
// path does not exist.
void require_field(const std::string& value, const char* key);
void require_path(const std::string& value, const char* key);

}  // namespace embodepth::cli
