#pragma once

#include <optional>
#include <string>
#include <string_view>

#include <Eigen/Core>

#include "embodepth/depth_map.hpp"
#include "embodepth/error.hpp"

namespace embodepth {

struct Intrinsics {
  double fx = 1.0;
  double fy = 1.0;
  double ox = 0.0;
  double oy = 0.0;

  Eigen::Matrix3d matrix() const;
};

// World-to-camera transform: x_c = R * x_w + T.
struct Extrinsics {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  bool is_identity() const;
};

enum class DepthMode {
  kEuclidean,  // distance from the camera center
  kZDepth,     // camera-frame z
};

std::string_view to_string(DepthMode mode);
DepthMode parse_depth_mode(std::string_view text);

// World Y points toward the ground and the ground plane is y_w = height_m.
struct CameraRig {
  Intrinsics intrinsics;
  Extrinsics extrinsics;
  double height_m = 1.65;
  int width = 0;
  int height_px = 0;
  DepthMode depth_mode = DepthMode::kEuclidean;
  double max_range_m = 200.0;
};

void validate(const Intrinsics& intrinsics);
void validate(const Extrinsics& extrinsics);
void validate(const CameraRig& rig);

// A = K [R | T].
using ProjectionMatrix = Eigen::Matrix<double, 3, 4>;

ProjectionMatrix projection_matrix(const Intrinsics& intrinsics, const Extrinsics& extrinsics);

struct PlaneSolution {
  double xw = 0.0;
  double zw = 0.0;
  double zc = 0.0;
};

// Solves the three projection equations for (x_w, z_w, z_c) with y_w = h.
// Throws kNoIntersection when the system is singular (ray parallel to the
// plane) and kBehindCamera when z_c <= 0.
PlaneSolution solve_world_on_plane(const ProjectionMatrix& a, double u, double v, double h);

struct GroundPoint {
  Eigen::Vector3d camera = Eigen::Vector3d::Zero();  // (x_c, y_c, z_c)
  Eigen::Vector3d world = Eigen::Vector3d::Zero();   // (x_w, y_w, z_w)
  double u = 0.0;
  double v = 0.0;
};

// Pixel -> point on the ground plane. Uses the closed form
// z_c = fy * h / (v - oy) when the extrinsics are the identity, otherwise
// solves the plane system and maps the world point into the camera frame.
GroundPoint backproject_ground_pixel(const CameraRig& rig, double u, double v);

// Individual routes, exposed so they can be cross-checked.
GroundPoint backproject_aligned(const Intrinsics& intrinsics, double h, double u, double v);
GroundPoint backproject_general(const ProjectionMatrix& a, const Extrinsics& extrinsics, double h,
                                double u, double v);

// Non-throwing variant; returns the failure reason instead.
struct GroundHit {
  std::optional<GroundPoint> point;
  ErrorCode failure = ErrorCode::kNoIntersection;
};
GroundHit intersect_ground(const CameraRig& rig, double u, double v) noexcept;

double ground_range(const GroundPoint& p, DepthMode mode);

// Per-pixel ground-plane depth assuming the whole view is planar. Pixels at or
// above the horizon, behind the camera, or beyond max_range_m are invalid.
DepthMap surface_depth(const CameraRig& rig);

// Key-value camera document (see README). width/height_px may be omitted and
// are then left at 0 for the caller to fill from the label image.
CameraRig parse_camera_config(std::string_view text);
CameraRig load_camera_config(const std::string& path);
std::string format_camera_config(const CameraRig& rig);

// Fills zero image dimensions from an image and validates the result.
CameraRig with_image_size(CameraRig rig, int width, int height);

}  // namespace embodepth
