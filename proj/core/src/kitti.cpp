#include "embodepth/kitti.hpp"

#include <sstream>
#include <vector>

#include <fmt/format.h>

#include "kv_document.hpp"

namespace embodepth::kitti {
namespace {

std::vector<double> find_row(std::string_view text, const std::string& key) {
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const auto line = detail::trim(text.substr(pos, end - pos));
    pos = end + 1;
    const auto colon = line.find(':');
    if (colon == std::string_view::npos || detail::trim(line.substr(0, colon)) != key) continue;
    std::istringstream in(std::string(line.substr(colon + 1)));
    std::vector<double> values;
    double v = 0.0;
    while (in >> v) values.push_back(v);
    if (!in.eof()) throw Error(ErrorCode::kFormat, fmt::format("calibration: bad number in {}", key));
    return values;
  }
  throw Error(ErrorCode::kFormat, fmt::format("calibration: missing {}", key));
}

}  // namespace

CameraRig parse_cam_to_cam(std::string_view text, int camera, double camera_height_m) {
  const std::string suffix = fmt::format("{:02d}", camera);
  const auto p = find_row(text, "P_rect_" + suffix);
  const auto size = find_row(text, "S_rect_" + suffix);
  if (p.size() != 12 || size.size() != 2) {
    throw Error(ErrorCode::kFormat,
                fmt::format("calibration: P_rect_{0} needs 12 values and S_rect_{0} 2", suffix));
  }
  CameraRig rig;
  rig.intrinsics = {p[0], p[5], p[2], p[6]};
  rig.height_m = camera_height_m;
  rig.width = static_cast<int>(size[0]);
  rig.height_px = static_cast<int>(size[1]);
  validate(rig);
  return rig;
}

CameraRig load_cam_to_cam(const std::string& path, int camera, double camera_height_m) {
  return parse_cam_to_cam(detail::read_text_file(path), camera, camera_height_m);
}

CameraRig reference_rig(DepthMode mode) {
  CameraRig rig;
  rig.intrinsics = {721.5377, 721.5377, 609.5593, 172.854};
  rig.height_m = kCameraHeightM;
  rig.width = 1242;
  rig.height_px = 375;
  rig.depth_mode = mode;
  return rig;
}

}  // namespace embodepth::kitti
