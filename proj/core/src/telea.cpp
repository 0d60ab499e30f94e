#include "embodepth/telea.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <tuple>
#include <vector>

#include <fmt/format.h>

namespace embodepth {
namespace {

enum class Flag : std::uint8_t { kKnown, kBand, kInside, kBarrier };

constexpr double kFar = 1e6;

struct HeapEntry {
  double t;
  int y;
  int x;

  bool operator>(const HeapEntry& o) const {
    return std::tie(t, y, x) > std::tie(o.t, o.y, o.x);
  }
};

struct Offset {
  int dx;
  int dy;
  double inv_dist2;
  double inv_dist;
};

class Marcher {
 public:
  Marcher(const DepthMap& depth, int radius)
      : w_(depth.width()), h_(depth.height()), out_(depth),
        flag_(w_, h_, Flag::kKnown), t_(w_, h_, 0.0) {
    for (int dy = -radius; dy <= radius; ++dy) {
      for (int dx = -radius; dx <= radius; ++dx) {
        const int d2 = dx * dx + dy * dy;
        if (d2 == 0 || d2 > radius * radius) continue;
        offsets_.push_back({dx, dy, 1.0 / d2, 1.0 / std::sqrt(static_cast<double>(d2))});
      }
    }
  }

  DepthMap run() {
    std::size_t holes = 0;
    std::size_t known = 0;
    for (int y = 0; y < h_; ++y) {
      for (int x = 0; x < w_; ++x) {
        switch (out_.state(x, y)) {
          case PixelState::kValid:
            ++known;
            lo_ = std::min(lo_, double(out_.at(x, y)));
            hi_ = std::max(hi_, double(out_.at(x, y)));
            break;
          case PixelState::kSky: flag_(x, y) = Flag::kBarrier; break;
          case PixelState::kInvalid:
            flag_(x, y) = Flag::kInside;
            t_(x, y) = kFar;
            ++holes;
            break;
        }
      }
    }
    if (holes == 0) return std::move(out_);
    if (known == 0) {
      throw Error(ErrorCode::kCannotInpaint, "cannot inpaint: depth map has no valid pixels");
    }

    for (int y = 0; y < h_; ++y) {
      for (int x = 0; x < w_; ++x) {
        if (flag_(x, y) == Flag::kKnown && touches_hole(x, y)) {
          flag_(x, y) = Flag::kBand;
          heap_.push({0.0, y, x});
        }
      }
    }

    std::size_t filled = 0;
    while (!heap_.empty()) {
      const HeapEntry top = heap_.top();
      heap_.pop();
      if (flag_(top.x, top.y) == Flag::kKnown || top.t > t_(top.x, top.y)) continue;
      flag_(top.x, top.y) = Flag::kKnown;

      const int nx[4] = {top.x, top.x - 1, top.x + 1, top.x};
      const int ny[4] = {top.y - 1, top.y, top.y, top.y + 1};
      for (int k = 0; k < 4; ++k) {
        const int x = nx[k];
        const int y = ny[k];
        if (!out_.contains(x, y)) continue;
        const Flag f = flag_(x, y);
        if (f == Flag::kKnown || f == Flag::kBarrier) continue;
        const double t = arrival_time(x, y);
        if (f == Flag::kInside) {
          t_(x, y) = t;
          fill(x, y);
          flag_(x, y) = Flag::kBand;
          ++filled;
          heap_.push({t, y, x});
        } else if (t < t_(x, y)) {
          t_(x, y) = t;
          heap_.push({t, y, x});
        }
      }
    }

    if (filled != holes) {
      throw Error(ErrorCode::kCannotInpaint,
                  fmt::format("cannot inpaint: {} hole pixels are not connected to any valid pixel",
                              holes - filled));
    }
    return std::move(out_);
  }

 private:
  bool available(int x, int y) const {
    if (!out_.contains(x, y)) return false;
    const Flag f = flag_(x, y);
    return f == Flag::kKnown || f == Flag::kBand;
  }

  bool touches_hole(int x, int y) const {
    const int nx[4] = {x, x - 1, x + 1, x};
    const int ny[4] = {y - 1, y, y, y + 1};
    for (int k = 0; k < 4; ++k) {
      if (out_.contains(nx[k], ny[k]) && flag_(nx[k], ny[k]) == Flag::kInside) return true;
    }
    return false;
  }

  // Upwind solution of |grad T| = 1 from one vertical and one horizontal neighbour.
  double solve(int x1, int y1, int x2, int y2) const {
    const bool a1 = available(x1, y1);
    const bool a2 = available(x2, y2);
    if (a1 && a2) {
      const double t1 = t_(x1, y1);
      const double t2 = t_(x2, y2);
      const double diff = t1 - t2;
      if (std::abs(diff) >= 1.0) return 1.0 + std::min(t1, t2);
      return 0.5 * (t1 + t2 + std::sqrt(2.0 - diff * diff));
    }
    if (a1) return 1.0 + t_(x1, y1);
    if (a2) return 1.0 + t_(x2, y2);
    return kFar;
  }

  double arrival_time(int x, int y) const {
    return std::min({solve(x, y - 1, x - 1, y), solve(x, y + 1, x - 1, y),
                     solve(x, y - 1, x + 1, y), solve(x, y + 1, x + 1, y)});
  }

  // Central difference where both sides are usable, one-sided otherwise.
  template <typename F>
  double difference(int x, int y, int dx, int dy, F value) const {
    const bool fwd = available(x + dx, y + dy);
    const bool back = available(x - dx, y - dy);
    if (fwd && back) return 0.5 * (value(x + dx, y + dy) - value(x - dx, y - dy));
    if (fwd) return value(x + dx, y + dy) - value(x, y);
    if (back) return value(x, y) - value(x - dx, y - dy);
    return 0.0;
  }

  double gradient_component(int x, int y, int dx, int dy) const {
    return difference(x, y, dx, dy, [this](int u, int v) { return t_(u, v); });
  }

  double image_gradient(int x, int y, int dx, int dy) const {
    return difference(x, y, dx, dy, [this](int u, int v) { return double(out_.at(u, v)); });
  }

  void fill(int x, int y) {
    double gx = gradient_component(x, y, 1, 0);
    double gy = gradient_component(x, y, 0, 1);
    const double gnorm = std::hypot(gx, gy);
    if (gnorm > 0.0) {
      gx /= gnorm;
      gy /= gnorm;
    }
    const double tp = t_(x, y);

    double sum_w = 0.0;
    double sum_wv = 0.0;
    for (const Offset& o : offsets_) {
      const int qx = x + o.dx;
      const int qy = y + o.dy;
      if (!available(qx, qy)) continue;
      // r = p - q
      const double rx = -o.dx;
      const double ry = -o.dy;
      double dir = gnorm > 0.0 ? std::abs(rx * gx + ry * gy) * o.inv_dist : 1.0;
      if (dir < 0.01) dir = 1e-6;
      const double lev = 1.0 / (1.0 + std::abs(t_(qx, qy) - tp));
      const double w = dir * o.inv_dist2 * lev;
      // first-order extrapolation from q towards p
      const double v = out_.at(qx, qy) + image_gradient(qx, qy, 1, 0) * rx +
                       image_gradient(qx, qy, 0, 1) * ry;
      sum_w += w;
      sum_wv += w * v;
    }
    // The upwind neighbour that triggered this fill is always available.
    const double value = std::clamp(sum_wv / sum_w, lo_, hi_);
    out_.set(x, y, static_cast<float>(value));
  }

  int w_;
  int h_;
  DepthMap out_;
  Grid<Flag> flag_;
  Grid<double> t_;
  std::vector<Offset> offsets_;
  double lo_ = std::numeric_limits<double>::infinity();
  double hi_ = -std::numeric_limits<double>::infinity();
  std::priority_queue<HeapEntry, std::vector<HeapEntry>, std::greater<>> heap_;
};

}  // namespace

DepthMap inpaint_telea(const DepthMap& depth, int radius) {
  if (radius < 1) {
    throw Error(ErrorCode::kDomain, fmt::format("inpaint radius must be >= 1, got {}", radius));
  }
  return Marcher(depth, radius).run();
}

}  // namespace embodepth
