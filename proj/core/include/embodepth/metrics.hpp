#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "embodepth/depth_map.hpp"
#include "embodepth/grid.hpp"

namespace embodepth {

struct MetricsReport {
  double abs_rel = 0.0;
  double sq_rel = 0.0;
  double rmse = 0.0;  // meters
  double rmse_log = 0.0;
  double delta1 = 0.0;
  double delta2 = 0.0;
  double delta3 = 0.0;
  std::size_t n_pixels = 0;
};

struct ErrorDistribution {
  double pct_within_5 = 0.0;   // fraction with |p - g| / g <= 0.05
  double pct_within_10 = 0.0;  // fraction with |p - g| / g <= 0.10
  std::size_t n_pixels = 0;
};

void to_json(nlohmann::json& j, const MetricsReport& m);
void from_json(const nlohmann::json& j, MetricsReport& m);
void to_json(nlohmann::json& j, const ErrorDistribution& d);
void from_json(const nlohmann::json& j, ErrorDistribution& d);

// Half-open pixel rectangle.
struct CropRect {
  int row_begin = 0;
  int row_end = 0;
  int col_begin = 0;
  int col_end = 0;

  bool contains(int x, int y) const noexcept {
    return y >= row_begin && y < row_end && x >= col_begin && x < col_end;
  }
  friend bool operator==(const CropRect&, const CropRect&) = default;
};

// Garg et al. evaluation crop; fractions truncated toward zero.
CropRect garg_crop(int width, int height);

struct EvalRange {
  double min_depth = 1e-3;
  double max_depth = 80.0;
  std::optional<CropRect> crop;

  static EvalRange unbounded() {
    return {0.0, std::numeric_limits<double>::infinity(), std::nullopt};
  }
};

// Standard depth metrics over pixels valid in both maps, inside mask (when
// given) and crop, with gt in [min_depth, max_depth]. median_scaling rescales
// the prediction by median(gt)/median(pred) first; diagnostics only.
MetricsReport depth_metrics(const DepthMap& pred, const DepthMap& gt, const Mask* mask = nullptr,
                            const EvalRange& range = {}, bool median_scaling = false);

ErrorDistribution error_distribution(const DepthMap& pred, const DepthMap& gt,
                                     const Mask* mask = nullptr,
                                     const EvalRange& range = EvalRange::unbounded());

// Bilinear resampling that only blends valid samples; pixels with no valid
// contributor stay invalid. Half-pixel-centre convention.
DepthMap resize_bilinear_valid(const DepthMap& depth, int width, int height);

// Scale-invariant log loss: mean(g^2) - mean(g)^2 with g = ln gt - ln pred.
double silog_loss(std::span<const double> pred, std::span<const double> gt);

struct LatentParams {
  std::vector<double> mu;
  std::vector<double> sigma;
};

enum class KlReduction { kMean, kSum };

// Per dimension: -ln sigma + (sigma^2 + mu^2) / 2 - 1/2.
double kl_loss(const LatentParams& params, KlReduction reduction = KlReduction::kMean);

struct KlGradient {
  std::vector<double> d_mu;
  std::vector<double> d_sigma;
};
KlGradient kl_loss_gradient(const LatentParams& params, KlReduction reduction = KlReduction::kMean);

// z = mu + eps * sigma.
std::vector<double> reparameterize(const LatentParams& params, std::span<const double> eps);

}  // namespace embodepth
