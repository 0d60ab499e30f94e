#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "embodepth/error.hpp"

namespace embodepth {

struct Pixel {
  int x = 0;  // column
  int y = 0;  // row

  friend bool operator==(const Pixel&, const Pixel&) = default;
};

// Row-major dense 2D array.
template <typename T>
class Grid {
 public:
  Grid() = default;
  Grid(int width, int height, T fill = T{})
      : width_(width), height_(height),
        data_(static_cast<std::size_t>(checked_area(width, height)), fill) {}

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  bool contains(int x, int y) const noexcept {
    return x >= 0 && y >= 0 && x < width_ && y < height_;
  }
  std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  T& operator()(int x, int y) noexcept { return data_[index(x, y)]; }
  const T& operator()(int x, int y) const noexcept { return data_[index(x, y)]; }

  std::span<T> data() noexcept { return data_; }
  std::span<const T> data() const noexcept { return data_; }

  bool same_shape(int width, int height) const noexcept {
    return width_ == width && height_ == height;
  }
  template <typename U>
  bool same_shape(const Grid<U>& other) const noexcept {
    return same_shape(other.width(), other.height());
  }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  static long long checked_area(int width, int height) {
    if (width < 0 || height < 0) {
      throw Error(ErrorCode::kShapeMismatch, "negative grid dimensions");
    }
    return static_cast<long long>(width) * height;
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

class Mask : public Grid<std::uint8_t> {
 public:
  using Grid::Grid;

  bool test(int x, int y) const noexcept { return (*this)(x, y) != 0; }
  void set(int x, int y, bool on = true) noexcept { (*this)(x, y) = on ? 1 : 0; }
  std::size_t count() const noexcept;

  static Mask all(int width, int height) { return Mask(width, height, 1); }
};

inline std::size_t Mask::count() const noexcept {
  std::size_t n = 0;
  for (auto v : data()) n += v != 0;
  return n;
}

// Works for anything exposing width()/height().
template <typename A, typename B>
void require_same_shape(const A& a, const B& b, const char* what) {
  if (a.width() != b.width() || a.height() != b.height()) {
    throw Error(ErrorCode::kDimensionMismatch,
                std::string(what) + ": dimension mismatch (" + std::to_string(a.width()) + "x" +
                    std::to_string(a.height()) + " vs " + std::to_string(b.width()) + "x" +
                    std::to_string(b.height()) + ")");
  }
}

}  // namespace embodepth
