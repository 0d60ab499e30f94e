#pragma once

#include <string>
#include <string_view>

#include "embodepth/camera.hpp"

namespace embodepth::kitti {

// KITTI mounts its cameras 1.65 m above the road.
inline constexpr double kCameraHeightM = 1.65;

// Builds a rig from calib_cam_to_cam.txt (P_rect_0N and S_rect_0N). The
// rectified camera frame is taken as aligned with the ground plane.
CameraRig parse_cam_to_cam(std::string_view text, int camera = 2,
                           double camera_height_m = kCameraHeightM);
CameraRig load_cam_to_cam(const std::string& path, int camera = 2,
                          double camera_height_m = kCameraHeightM);

// 1242x375 rig with the 2011_09_26 rectified camera-2 intrinsics.
CameraRig reference_rig(DepthMode mode = DepthMode::kEuclidean);

}  // namespace embodepth::kitti
