#include "run_config.hpp"

#include <filesystem>
#include <fstream>
#include <set>

#include <fmt/format.h>

#include "embodepth/kitti.hpp"

namespace embodepth::cli {

std::string_view to_string(OutputFormat f) {
  switch (f) {
    case OutputFormat::kPng16: return "png16";
    case OutputFormat::kF32: return "f32";
    default: return "both";
  }
}

OutputFormat parse_output_format(std::string_view text) {
  if (text == "png16") return OutputFormat::kPng16;
  if (text == "f32") return OutputFormat::kF32;
  if (text == "both") return OutputFormat::kBoth;
  throw Error(ErrorCode::kConfig, fmt::format("unknown format '{}' (png16, f32, both)", text));
}

nlohmann::json to_json(const RunConfig& c) {
  nlohmann::json stages = nlohmann::json::array();
  for (Stage s : c.stages) stages.push_back(std::string(to_string(s)));
  nlohmann::json j = {
      {"camera", c.camera},
      {"classes", c.classes},
      {"dataset", c.dataset},
      {"camera_height_m", c.camera_height_m},
      {"seg_dir", c.seg_dir},
      {"instance_dir", c.instance_dir},
      {"output_dir", c.output_dir},
      {"pred_dir", c.pred_dir},
      {"gt_dir", c.gt_dir},
      {"scene", c.scene},
      {"instances", c.instances},
      {"seg", c.seg},
      {"captions", c.captions},
      {"output", c.output},
      {"stages", stages},
      {"depth_mode", c.depth_mode ? nlohmann::json(std::string(to_string(*c.depth_mode)))
                                  : nlohmann::json(nullptr)},
      {"inpaint_radius", c.inpaint_radius},
      {"min_depth", c.min_depth},
      {"max_depth", c.max_depth},
      {"garg_crop", c.garg_crop},
      {"median_scaling", c.median_scaling},
      {"group_by_date", c.group_by_date},
      {"min_pixels", c.min_pixels},
      {"aggregation", c.aggregation == DepthAggregation::kMedian ? "median" : "mean"},
      {"format", std::string(to_string(c.format))},
  };
  return j;
}

RunConfig config_from_json(const nlohmann::json& in) {
  const nlohmann::json& j = in.contains("config") && in.at("config").is_object() ? in.at("config")
                                                                                 : in;
  if (!j.is_object()) throw Error(ErrorCode::kConfig, "run config must be a JSON object");
  static const std::set<std::string> known = {
      "camera", "classes", "dataset", "camera_height_m", "seg_dir", "instance_dir",
      "output_dir", "pred_dir", "gt_dir", "scene", "instances", "seg", "captions", "output",
      "stages", "depth_mode", "inpaint_radius", "min_depth", "max_depth", "garg_crop",
      "median_scaling", "group_by_date", "min_pixels", "aggregation", "format"};
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) throw Error(ErrorCode::kConfig, fmt::format("unknown config key '{}'", key));
  }
  RunConfig c;
  try {
    auto str = [&](const char* key, std::string& out) {
      if (j.contains(key)) j.at(key).get_to(out);
    };
    str("camera", c.camera);
    str("classes", c.classes);
    str("dataset", c.dataset);
    str("seg_dir", c.seg_dir);
    str("instance_dir", c.instance_dir);
    str("output_dir", c.output_dir);
    str("pred_dir", c.pred_dir);
    str("gt_dir", c.gt_dir);
    str("scene", c.scene);
    str("instances", c.instances);
    str("seg", c.seg);
    str("captions", c.captions);
    str("output", c.output);
    if (j.contains("camera_height_m")) j.at("camera_height_m").get_to(c.camera_height_m);
    if (j.contains("stages")) {
      c.stages.clear();
      for (const auto& s : j.at("stages")) c.stages.push_back(parse_stage(s.get<std::string>()));
    }
    if (j.contains("depth_mode") && !j.at("depth_mode").is_null()) {
      c.depth_mode = parse_depth_mode(j.at("depth_mode").get<std::string>());
    }
    if (j.contains("inpaint_radius")) j.at("inpaint_radius").get_to(c.inpaint_radius);
    if (j.contains("min_depth")) j.at("min_depth").get_to(c.min_depth);
    if (j.contains("max_depth")) j.at("max_depth").get_to(c.max_depth);
    if (j.contains("garg_crop")) j.at("garg_crop").get_to(c.garg_crop);
    if (j.contains("median_scaling")) j.at("median_scaling").get_to(c.median_scaling);
    if (j.contains("group_by_date")) j.at("group_by_date").get_to(c.group_by_date);
    if (j.contains("min_pixels")) j.at("min_pixels").get_to(c.min_pixels);
    if (j.contains("aggregation")) {
      const auto a = j.at("aggregation").get<std::string>();
      if (a == "median") c.aggregation = DepthAggregation::kMedian;
      else if (a == "mean") c.aggregation = DepthAggregation::kMean;
      else throw Error(ErrorCode::kConfig, fmt::format("unknown aggregation '{}'", a));
    }
    if (j.contains("format")) c.format = parse_output_format(j.at("format").get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kConfig, fmt::format("run config: {}", e.what()));
  }
  if (!c.dataset.empty() && c.dataset != "kitti") {
    throw Error(ErrorCode::kConfig, fmt::format("unknown dataset '{}'", c.dataset));
  }
  if (c.inpaint_radius < 1) throw Error(ErrorCode::kConfig, "inpaint_radius must be >= 1");
  if (!(c.min_depth > 0.0) || !(c.max_depth > c.min_depth)) {
    throw Error(ErrorCode::kConfig, "evaluation bounds need 0 < min_depth < max_depth");
  }
  return c;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, fmt::format("cannot open config '{}'", path));
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kConfig, fmt::format("{}: {}", path, e.what()));
  }
  return config_from_json(j);
}

ClassTable load_table(const RunConfig& c) {
  return c.classes.empty() ? ClassTable::cityscapes() : ClassTable::load(c.classes);
}

CameraRig load_rig(const RunConfig& c) {
  require_path(c.camera, "camera");
  CameraRig rig = c.dataset == "kitti" ? kitti::load_cam_to_cam(c.camera, 2, c.camera_height_m)
                                       : load_camera_config(c.camera);
  if (c.depth_mode) rig.depth_mode = *c.depth_mode;
  return rig;
}

void require_field(const std::string& value, const char* key) {
  if (value.empty()) throw Error(ErrorCode::kConfig, fmt::format("missing required option '{}'", key));
}

void require_path(const std::string& value, const char* key) {
  require_field(value, key);
  if (!std::filesystem::exists(value)) {
    throw Error(ErrorCode::kIo, fmt::format("{}: '{}' does not exist", key, value));
  }
}

}  // namespace embodepth::cli
