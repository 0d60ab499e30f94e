#include "embodepth/camera.hpp"

#include <cmath>

#include <Eigen/LU>
#include <fmt/format.h>

#include "kv_document.hpp"

namespace embodepth {
namespace {

constexpr double kHorizonEpsPx = 1e-6;
// |det(M)| / (|c0| |c1| |c2|) below this counts as a ray parallel to the plane.
constexpr double kSingularTolerance = 1e-12;
constexpr double kOrthonormalTolerance = 1e-9;

bool finite(double v) { return std::isfinite(v); }

}  // namespace

Eigen::Matrix3d Intrinsics::matrix() const {
  Eigen::Matrix3d k;
  k << fx, 0.0, ox, 0.0, fy, oy, 0.0, 0.0, 1.0;
  return k;
}

bool Extrinsics::is_identity() const {
  return rotation == Eigen::Matrix3d::Identity() && translation == Eigen::Vector3d::Zero();
}

std::string_view to_string(DepthMode mode) {
  return mode == DepthMode::kEuclidean ? "euclidean" : "z_depth";
}

DepthMode parse_depth_mode(std::string_view text) {
  if (text == "euclidean" || text == "EUCLIDEAN") return DepthMode::kEuclidean;
  if (text == "z_depth" || text == "Z_DEPTH" || text == "z") return DepthMode::kZDepth;
  throw Error(ErrorCode::kConfig, fmt::format("unknown depth mode '{}'", text));
}

void validate(const Intrinsics& k) {
  if (!(k.fx > 0.0) || !(k.fy > 0.0) || !finite(k.fx) || !finite(k.fy)) {
    throw Error(ErrorCode::kCalibration, "focal lengths must be finite and positive");
  }
  if (!finite(k.ox) || !finite(k.oy)) {
    throw Error(ErrorCode::kCalibration, "principal point must be finite");
  }
}

void validate(const Extrinsics& e) {
  if (!e.rotation.allFinite() || !e.translation.allFinite()) {
    throw Error(ErrorCode::kCalibration, "extrinsics must be finite");
  }
  const Eigen::Matrix3d gram = e.rotation.transpose() * e.rotation;
  const double off = (gram - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  const double det = e.rotation.determinant();
  if (off > kOrthonormalTolerance || std::abs(det - 1.0) > kOrthonormalTolerance) {
    throw Error(ErrorCode::kCalibration,
                fmt::format("rotation is not a proper orthonormal matrix (|R^T R - I| = {:.3g}, "
                            "det = {:.12g})",
                            off, det));
  }
}

void validate(const CameraRig& rig) {
  validate(rig.intrinsics);
  validate(rig.extrinsics);
  if (!(rig.height_m > 0.0) || !finite(rig.height_m)) {
    throw Error(ErrorCode::kCalibration, "camera height must be positive");
  }
  if (rig.width < 1 || rig.height_px < 1) {
    throw Error(ErrorCode::kCalibration, "image dimensions must be at least 1x1");
  }
  if (!(rig.max_range_m > 0.0)) {
    throw Error(ErrorCode::kCalibration, "max_range_m must be positive");
  }
}

ProjectionMatrix projection_matrix(const Intrinsics& intrinsics, const Extrinsics& extrinsics) {
  validate(intrinsics);
  validate(extrinsics);
  ProjectionMatrix rt;
  rt.leftCols<3>() = extrinsics.rotation;
  rt.col(3) = extrinsics.translation;
  return intrinsics.matrix() * rt;
}

namespace {

// Cramer's rule on
//   a11 xw + a13 zw - u zc = -(a12 h + a14)
//   a21 xw + a23 zw - v zc = -(a22 h + a24)
//   a31 xw + a33 zw -   zc = -(a32 h + a34)
bool solve_plane_system(const ProjectionMatrix& a, double u, double v, double h,
                        PlaneSolution& out, ErrorCode& failure) noexcept {
  Eigen::Matrix3d m;
  m << a(0, 0), a(0, 2), -u,
       a(1, 0), a(1, 2), -v,
       a(2, 0), a(2, 2), -1.0;
  const Eigen::Vector3d rhs(-(a(0, 1) * h + a(0, 3)), -(a(1, 1) * h + a(1, 3)),
                            -(a(2, 1) * h + a(2, 3)));
  const double det = m.determinant();
  const double scale = m.col(0).norm() * m.col(1).norm() * m.col(2).norm();
  if (!(std::abs(det) > kSingularTolerance * scale)) {
    failure = ErrorCode::kNoIntersection;
    return false;
  }
  Eigen::Matrix3d mx = m, mz = m, mc = m;
  mx.col(0) = rhs;
  mz.col(1) = rhs;
  mc.col(2) = rhs;
  out.xw = mx.determinant() / det;
  out.zw = mz.determinant() / det;
  out.zc = mc.determinant() / det;
  if (!(out.zc > 0.0)) {
    failure = ErrorCode::kBehindCamera;
    return false;
  }
  return true;
}

bool aligned_point(const Intrinsics& k, double h, double u, double v, GroundPoint& out) noexcept {
  const double dv = v - k.oy;
  if (!(dv > kHorizonEpsPx)) return false;
  const double zc = k.fy * h / dv;
  const double xc = (u - k.ox) * zc / k.fx;
  out.camera = Eigen::Vector3d(xc, h, zc);
  out.world = out.camera;
  out.u = u;
  out.v = v;
  return true;
}

bool general_point(const ProjectionMatrix& a, const Extrinsics& e, double h, double u, double v,
                   GroundPoint& out, ErrorCode& failure) noexcept {
  PlaneSolution s;
  if (!solve_plane_system(a, u, v, h, s, failure)) return false;
  out.world = Eigen::Vector3d(s.xw, h, s.zw);
  out.camera = e.rotation * out.world + e.translation;
  out.u = u;
  out.v = v;
  return true;
}

void check_in_image(const CameraRig& rig, double u, double v) {
  if (!(u >= 0.0 && v >= 0.0 && u <= rig.width - 1 && v <= rig.height_px - 1)) {
    throw Error(ErrorCode::kDomain,
                fmt::format("pixel ({}, {}) outside {}x{} image", u, v, rig.width, rig.height_px));
  }
}

[[noreturn]] void throw_failure(ErrorCode code, double u, double v) {
  if (code == ErrorCode::kBehindCamera) {
    throw Error(code, fmt::format("ground intersection for pixel ({}, {}) is behind the camera",
                                  u, v));
  }
  throw Error(code,
              fmt::format("viewing ray through pixel ({}, {}) does not meet the ground plane", u, v));
}

}  // namespace

PlaneSolution solve_world_on_plane(const ProjectionMatrix& a, double u, double v, double h) {
  PlaneSolution s;
  ErrorCode failure{};
  if (!solve_plane_system(a, u, v, h, s, failure)) throw_failure(failure, u, v);
  return s;
}

GroundPoint backproject_aligned(const Intrinsics& intrinsics, double h, double u, double v) {
  GroundPoint p;
  if (!aligned_point(intrinsics, h, u, v, p)) throw_failure(ErrorCode::kNoIntersection, u, v);
  return p;
}

GroundPoint backproject_general(const ProjectionMatrix& a, const Extrinsics& extrinsics, double h,
                                double u, double v) {
  GroundPoint p;
  ErrorCode failure{};
  if (!general_point(a, extrinsics, h, u, v, p, failure)) throw_failure(failure, u, v);
  return p;
}

GroundPoint backproject_ground_pixel(const CameraRig& rig, double u, double v) {
  validate(rig);
  check_in_image(rig, u, v);
  if (rig.extrinsics.is_identity()) return backproject_aligned(rig.intrinsics, rig.height_m, u, v);
  return backproject_general(projection_matrix(rig.intrinsics, rig.extrinsics), rig.extrinsics,
                             rig.height_m, u, v);
}

GroundHit intersect_ground(const CameraRig& rig, double u, double v) noexcept {
  GroundHit hit;
  GroundPoint p;
  if (rig.extrinsics.is_identity()) {
    if (aligned_point(rig.intrinsics, rig.height_m, u, v, p)) hit.point = p;
    return hit;
  }
  ProjectionMatrix rt;
  rt.leftCols<3>() = rig.extrinsics.rotation;
  rt.col(3) = rig.extrinsics.translation;
  const ProjectionMatrix a = rig.intrinsics.matrix() * rt;
  if (general_point(a, rig.extrinsics, rig.height_m, u, v, p, hit.failure)) hit.point = p;
  return hit;
}

double ground_range(const GroundPoint& p, DepthMode mode) {
  return mode == DepthMode::kZDepth ? p.camera.z() : p.camera.norm();
}

DepthMap surface_depth(const CameraRig& rig) {
  validate(rig);
  DepthMap out(rig.width, rig.height_px);
  const bool aligned = rig.extrinsics.is_identity();
  const ProjectionMatrix a = projection_matrix(rig.intrinsics, rig.extrinsics);

  for (int y = 0; y < rig.height_px; ++y) {
    for (int x = 0; x < rig.width; ++x) {
      GroundPoint p;
      ErrorCode failure{};
      const bool ok = aligned ? aligned_point(rig.intrinsics, rig.height_m, x, y, p)
                              : general_point(a, rig.extrinsics, rig.height_m, x, y, p, failure);
      if (!ok) continue;
      const double range = ground_range(p, rig.depth_mode);
      if (!(range > 0.0) || range > rig.max_range_m) continue;
      out.set(x, y, static_cast<float>(range));
    }
  }
  return out;
}

CameraRig parse_camera_config(std::string_view text) {
  constexpr std::string_view doc = "camera config";
  CameraRig rig;
  bool have[5] = {};
  for (const auto& e : detail::parse_kv(text, doc)) {
    if (e.key == "fx") {
      rig.intrinsics.fx = detail::parse_number(e, doc);
      have[0] = true;
    } else if (e.key == "fy") {
      rig.intrinsics.fy = detail::parse_number(e, doc);
      have[1] = true;
    } else if (e.key == "ox") {
      rig.intrinsics.ox = detail::parse_number(e, doc);
      have[2] = true;
    } else if (e.key == "oy") {
      rig.intrinsics.oy = detail::parse_number(e, doc);
      have[3] = true;
    } else if (e.key == "height_m") {
      rig.height_m = detail::parse_number(e, doc);
      have[4] = true;
    } else if (e.key == "width") {
      rig.width = static_cast<int>(detail::parse_integer(e, doc));
    } else if (e.key == "height_px") {
      rig.height_px = static_cast<int>(detail::parse_integer(e, doc));
    } else if (e.key == "rotation") {
      const auto r = detail::parse_numbers(e, doc);
      if (r.size() != 9) {
        throw Error(ErrorCode::kConfig, fmt::format("{}:{}: rotation expects 9 numbers (row-major)",
                                                    doc, e.line));
      }
      for (int i = 0; i < 9; ++i) rig.extrinsics.rotation(i / 3, i % 3) = r[i];
    } else if (e.key == "translation") {
      const auto t = detail::parse_numbers(e, doc);
      if (t.size() != 3) {
        throw Error(ErrorCode::kConfig,
                    fmt::format("{}:{}: translation expects 3 numbers", doc, e.line));
      }
      rig.extrinsics.translation = Eigen::Vector3d(t[0], t[1], t[2]);
    } else if (e.key == "depth_mode") {
      rig.depth_mode = parse_depth_mode(e.value);
    } else if (e.key == "max_range_m") {
      rig.max_range_m = detail::parse_number(e, doc);
    } else {
      throw Error(ErrorCode::kConfig, fmt::format("{}:{}: unknown key '{}'", doc, e.line, e.key));
    }
  }
  constexpr const char* names[] = {"fx", "fy", "ox", "oy", "height_m"};
  for (int i = 0; i < 5; ++i) {
    if (!have[i]) {
      throw Error(ErrorCode::kConfig, fmt::format("{}: missing required key '{}'", doc, names[i]));
    }
  }
  validate(rig.intrinsics);
  validate(rig.extrinsics);
  if (rig.width < 0 || rig.height_px < 0) {
    throw Error(ErrorCode::kConfig, "camera config: image dimensions must be non-negative");
  }
  return rig;
}

CameraRig load_camera_config(const std::string& path) {
  return parse_camera_config(detail::read_text_file(path));
}

std::string format_camera_config(const CameraRig& rig) {
  const auto& k = rig.intrinsics;
  const auto& r = rig.extrinsics.rotation;
  const auto& t = rig.extrinsics.translation;
  std::string out;
  out += fmt::format("fx = {}\nfy = {}\nox = {}\noy = {}\n", k.fx, k.fy, k.ox, k.oy);
  out += fmt::format("height_m = {}\n", rig.height_m);
  if (rig.width > 0) out += fmt::format("width = {}\n", rig.width);
  if (rig.height_px > 0) out += fmt::format("height_px = {}\n", rig.height_px);
  out += fmt::format("rotation = {} {} {} {} {} {} {} {} {}\n", r(0, 0), r(0, 1), r(0, 2), r(1, 0),
                     r(1, 1), r(1, 2), r(2, 0), r(2, 1), r(2, 2));
  out += fmt::format("translation = {} {} {}\n", t.x(), t.y(), t.z());
  out += fmt::format("depth_mode = {}\n", to_string(rig.depth_mode));
  out += fmt::format("max_range_m = {}\n", rig.max_range_m);
  return out;
}

CameraRig with_image_size(CameraRig rig, int width, int height) {
  if (rig.width == 0) rig.width = width;
  if (rig.height_px == 0) rig.height_px = height;
  if (rig.width != width || rig.height_px != height) {
    throw Error(ErrorCode::kDimensionMismatch,
                fmt::format("camera config declares {}x{} but image is {}x{}", rig.width,
                            rig.height_px, width, height));
  }
  validate(rig);
  return rig;
}

}  // namespace embodepth
