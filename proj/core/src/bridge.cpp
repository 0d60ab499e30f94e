#include "embodepth/bridge.hpp"

#include <cmath>
#include <fmt/format.h>

#include "embodepth/version.hpp"

namespace embodepth::bridge {

namespace {

void require_area(std::size_t n, int width, int height, const char* what) {
  if (width <= 0 || height <= 0 ||
      n != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw Error(ErrorCode::kShapeMismatch,
                fmt::format("{}: {} elements do not form a {}x{} array", what, n, width, height));
  }
}

}  // namespace

std::string_view version() { return kVersion; }

SegmentationMap seg_from_array(std::span<const std::uint16_t> seg, int width, int height,
                               const ClassTable& table) {
  require_area(seg.size(), width, height, "seg");
  Grid<LabelId> labels(width, height);
  std::copy(seg.begin(), seg.end(), labels.data().begin());
  return SegmentationMap(std::move(labels), table);
}

DepthMap depth_from_encoded(std::span<const float> values, int width, int height) {
  require_area(values.size(), width, height, "depth");
  DepthMap d(width, height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const float v = values[static_cast<std::size_t>(y) * width + x];
      if (std::isinf(v) && v > 0) {
        d.set_sky(x, y);
      } else if (v != 0.0f) {
        d.set(x, y, v);
      }
    }
  }
  return d;
}

StageArrays compute(const CameraRig& rig, std::span<const std::uint16_t> seg, int width,
                    int height, const ClassTable& table, const PipelineOptions& options) {
  const SegmentationMap labels = seg_from_array(seg, width, height, table);
  const EmbodiedDepthBundle bundle =
      run_pipeline(with_image_size(rig, width, height), labels, table, options);
  StageArrays out;
  out.width = width;
  out.height = height;
  for (std::size_t s = 0; s < kAllStages.size(); ++s) {
    const DepthMap& d = bundle.stage(kAllStages[s]);
    auto& values = out.values[s];
    auto& states = out.states[s];
    values.reserve(seg.size());
    states.reserve(seg.size());
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        values.push_back(d.encoded(x, y));
        states.push_back(static_cast<std::uint8_t>(d.state(x, y)));
      }
    }
  }
  return out;
}

nlohmann::json describe(std::span<const float> scene, std::span<const std::uint16_t> instances,
                        std::span<const std::uint16_t> seg, int width, int height,
                        const ClassTable& table, const std::vector<std::string>& captions,
                        const ObjectDepthOptions& options) {
  if (scene.empty() && instances.empty() && seg.empty()) {
    return combine_text(captions, {}).to_json();
  }
  const SegmentationMap labels = seg_from_array(seg, width, height, table);
  const DepthMap depth = depth_from_encoded(scene, width, height);
  require_area(instances.size(), width, height, "instances");
  Grid<InstanceId> ids(width, height);
  std::copy(instances.begin(), instances.end(), ids.data().begin());
  const InstanceMap inst(std::move(ids), labels);
  return combine_text(captions, object_depths(depth, inst, labels, table, options)).to_json();
}

}  // namespace embodepth::bridge
