#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>

#include "embodepth/grid.hpp"

namespace embodepth {

enum class PixelState : std::uint8_t { kInvalid = 0, kValid = 1, kSky = 2 };

// Per-pixel metric depth. Valid pixels hold a finite positive value; sky is a
// flag rather than a stored number, and invalid pixels hold 0.
class DepthMap {
 public:
  DepthMap() = default;
  DepthMap(int width, int height)
      : values_(width, height, 0.0f), state_(width, height, PixelState::kInvalid) {}

  int width() const noexcept { return values_.width(); }
  int height() const noexcept { return values_.height(); }
  bool contains(int x, int y) const noexcept { return values_.contains(x, y); }

  PixelState state(int x, int y) const noexcept { return state_(x, y); }
  bool valid(int x, int y) const noexcept { return state_(x, y) == PixelState::kValid; }
  bool sky(int x, int y) const noexcept { return state_(x, y) == PixelState::kSky; }
  float at(int x, int y) const noexcept { return values_(x, y); }

  // Throws kDomain unless depth is finite and > 0.
  void set(int x, int y, float depth);
  void set_sky(int x, int y) noexcept;
  void invalidate(int x, int y) noexcept;

  std::size_t valid_count() const noexcept;
  std::size_t sky_count() const noexcept;

  const Grid<float>& values() const noexcept { return values_; }
  const Grid<PixelState>& states() const noexcept { return state_; }

  // Value for serialization: depth when valid, +inf for sky, 0 when invalid.
  float encoded(int x, int y) const noexcept {
    switch (state_(x, y)) {
      case PixelState::kValid: return values_(x, y);
      case PixelState::kSky: return std::numeric_limits<float>::infinity();
      default: return 0.0f;
    }
  }

  friend bool operator==(const DepthMap&, const DepthMap&) = default;

 private:
  Grid<float> values_;
  Grid<PixelState> state_;
};

}  // namespace embodepth
