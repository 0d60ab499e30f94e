#include "embodepth/depth_map.hpp"

#include <cmath>
#include <string>

namespace embodepth {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kCalibration: return "calibration";
    case ErrorCode::kNoIntersection: return "no-intersection";
    case ErrorCode::kBehindCamera: return "behind-camera";
    case ErrorCode::kFormat: return "format";
    case ErrorCode::kUnknownLabel: return "unknown-label";
    case ErrorCode::kDimensionMismatch: return "dimension-mismatch";
    case ErrorCode::kCannotInpaint: return "cannot-inpaint";
    case ErrorCode::kEmptyEvaluation: return "empty-evaluation";
    case ErrorCode::kDomain: return "domain";
    case ErrorCode::kShapeMismatch: return "shape-mismatch";
    case ErrorCode::kDegenerateCrop: return "degenerate-crop";
    case ErrorCode::kConfig: return "config";
    case ErrorCode::kIo: return "io";
  }
  return "unknown";
}

void DepthMap::set(int x, int y, float depth) {
  if (!std::isfinite(depth) || depth <= 0.0f) {
    throw Error(ErrorCode::kDomain, "depth must be finite and positive, got " +
                                        std::to_string(depth) + " at (" + std::to_string(x) +
                                        ", " + std::to_string(y) + ")");
  }
  values_(x, y) = depth;
  state_(x, y) = PixelState::kValid;
}

void DepthMap::set_sky(int x, int y) noexcept {
  values_(x, y) = 0.0f;
  state_(x, y) = PixelState::kSky;
}

void DepthMap::invalidate(int x, int y) noexcept {
  values_(x, y) = 0.0f;
  state_(x, y) = PixelState::kInvalid;
}

std::size_t DepthMap::valid_count() const noexcept {
  std::size_t n = 0;
  for (auto s : state_.data()) n += s == PixelState::kValid;
  return n;
}

std::size_t DepthMap::sky_count() const noexcept {
  std::size_t n = 0;
  for (auto s : state_.data()) n += s == PixelState::kSky;
  return n;
}

}  // namespace embodepth
