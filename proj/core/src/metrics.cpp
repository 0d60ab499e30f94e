#include "embodepth/metrics.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace embodepth {

void to_json(nlohmann::json& j, const MetricsReport& m) {
  j = {{"abs_rel", m.abs_rel}, {"sq_rel", m.sq_rel},   {"rmse", m.rmse},
       {"rmse_log", m.rmse_log}, {"delta1", m.delta1}, {"delta2", m.delta2},
       {"delta3", m.delta3},   {"n_pixels", m.n_pixels}};
}

void from_json(const nlohmann::json& j, MetricsReport& m) {
  j.at("abs_rel").get_to(m.abs_rel);
  j.at("sq_rel").get_to(m.sq_rel);
  j.at("rmse").get_to(m.rmse);
  j.at("rmse_log").get_to(m.rmse_log);
  j.at("delta1").get_to(m.delta1);
  j.at("delta2").get_to(m.delta2);
  j.at("delta3").get_to(m.delta3);
  j.at("n_pixels").get_to(m.n_pixels);
}

void to_json(nlohmann::json& j, const ErrorDistribution& d) {
  j = {{"pct_within_5", d.pct_within_5},
       {"pct_within_10", d.pct_within_10},
       {"n_pixels", d.n_pixels}};
}

void from_json(const nlohmann::json& j, ErrorDistribution& d) {
  j.at("pct_within_5").get_to(d.pct_within_5);
  j.at("pct_within_10").get_to(d.pct_within_10);
  j.at("n_pixels").get_to(d.n_pixels);
}

CropRect garg_crop(int width, int height) {
  if (width < 1 || height < 1) {
    throw Error(ErrorCode::kDegenerateCrop, "crop needs a non-empty image");
  }
  CropRect c;
  c.row_begin = static_cast<int>(0.40810811 * height);
  c.row_end = static_cast<int>(0.99189189 * height);
  c.col_begin = static_cast<int>(0.03594771 * width);
  c.col_end = static_cast<int>(0.96405229 * width);
  if (c.row_begin >= c.row_end || c.col_begin >= c.col_end) {
    throw Error(ErrorCode::kDegenerateCrop,
                fmt::format("Garg crop of a {}x{} image is empty", width, height));
  }
  return c;
}

namespace {

struct Pair {
  double pred;
  double gt;
};

std::vector<Pair> collect(const DepthMap& pred, const DepthMap& gt, const Mask* mask,
                          const EvalRange& range, const char* what) {
  require_same_shape(pred, gt, what);
  if (mask != nullptr) require_same_shape(*mask, gt, what);
  if (!(range.min_depth < range.max_depth)) {
    throw Error(ErrorCode::kDomain, "evaluation range needs min_depth < max_depth");
  }
  std::vector<Pair> pairs;
  for (int y = 0; y < gt.height(); ++y) {
    for (int x = 0; x < gt.width(); ++x) {
      if (!pred.valid(x, y) || !gt.valid(x, y)) continue;
      if (mask != nullptr && !mask->test(x, y)) continue;
      if (range.crop && !range.crop->contains(x, y)) continue;
      const double g = gt.at(x, y);
      if (g < range.min_depth || g > range.max_depth || !(g > 0.0)) continue;
      pairs.push_back({pred.at(x, y), g});
    }
  }
  if (pairs.empty()) {
    throw Error(ErrorCode::kEmptyEvaluation, fmt::format("{}: no evaluable pixels", what));
  }
  return pairs;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

MetricsReport depth_metrics(const DepthMap& pred, const DepthMap& gt, const Mask* mask,
                            const EvalRange& range, bool median_scaling) {
  std::vector<Pair> pairs = collect(pred, gt, mask, range, "depth metrics");
  if (median_scaling) {
    std::vector<double> p, g;
    for (const auto& q : pairs) {
      p.push_back(q.pred);
      g.push_back(q.gt);
    }
    const double scale = median(g) / median(p);
    for (auto& q : pairs) q.pred *= scale;
  }

  double abs_rel = 0, sq_rel = 0, sq = 0, sq_log = 0;
  std::size_t d1 = 0, d2 = 0, d3 = 0;
  for (const auto& [p, g] : pairs) {
    const double diff = p - g;
    abs_rel += std::abs(diff) / g;
    sq_rel += diff * diff / g;
    sq += diff * diff;
    const double dl = std::log(p) - std::log(g);
    sq_log += dl * dl;
    const double ratio = std::max(p / g, g / p);
    d1 += ratio < 1.25;
    d2 += ratio < 1.25 * 1.25;
    d3 += ratio < 1.25 * 1.25 * 1.25;
  }
  const double n = static_cast<double>(pairs.size());
  MetricsReport r;
  r.abs_rel = abs_rel / n;
  r.sq_rel = sq_rel / n;
  r.rmse = std::sqrt(sq / n);
  r.rmse_log = std::sqrt(sq_log / n);
  r.delta1 = static_cast<double>(d1) / n;
  r.delta2 = static_cast<double>(d2) / n;
  r.delta3 = static_cast<double>(d3) / n;
  r.n_pixels = pairs.size();
  return r;
}

ErrorDistribution error_distribution(const DepthMap& pred, const DepthMap& gt, const Mask* mask,
                                     const EvalRange& range) {
  const std::vector<Pair> pairs = collect(pred, gt, mask, range, "error distribution");
  std::size_t w5 = 0, w10 = 0;
  for (const auto& [p, g] : pairs) {
    const double rel = std::abs(p - g) / g;
    w5 += rel <= 0.05;
    w10 += rel <= 0.10;
  }
  const double n = static_cast<double>(pairs.size());
  return {static_cast<double>(w5) / n, static_cast<double>(w10) / n, pairs.size()};
}

DepthMap resize_bilinear_valid(const DepthMap& depth, int width, int height) {
  if (width < 1 || height < 1) throw Error(ErrorCode::kShapeMismatch, "resize to an empty image");
  if (depth.width() == width && depth.height() == height) return depth;
  DepthMap out(width, height);
  const double sx = static_cast<double>(depth.width()) / width;
  const double sy = static_cast<double>(depth.height()) / height;
  for (int y = 0; y < height; ++y) {
    const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, depth.height() - 1.0);
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, depth.height() - 1);
    const double ty = fy - y0;
    for (int x = 0; x < width; ++x) {
      const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, depth.width() - 1.0);
      const int x0 = static_cast<int>(fx);
      const int x1 = std::min(x0 + 1, depth.width() - 1);
      const double tx = fx - x0;
      const int xs[4] = {x0, x1, x0, x1};
      const int ys[4] = {y0, y0, y1, y1};
      const double ws[4] = {(1 - tx) * (1 - ty), tx * (1 - ty), (1 - tx) * ty, tx * ty};
      double sw = 0.0, sv = 0.0;
      for (int k = 0; k < 4; ++k) {
        if (ws[k] > 0.0 && depth.valid(xs[k], ys[k])) {
          sw += ws[k];
          sv += ws[k] * depth.at(xs[k], ys[k]);
        }
      }
      if (sw > 0.0) out.set(x, y, static_cast<float>(sv / sw));
    }
  }
  return out;
}

double silog_loss(std::span<const double> pred, std::span<const double> gt) {
  if (pred.size() != gt.size() || pred.empty()) {
    throw Error(ErrorCode::kShapeMismatch, "silog loss needs equal, non-empty inputs");
  }
  double sum = 0.0, sum_sq = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (!(pred[i] > 0.0) || !(gt[i] > 0.0)) {
      throw Error(ErrorCode::kDomain, "silog loss needs strictly positive depths");
    }
    const double g = std::log(gt[i]) - std::log(pred[i]);
    sum += g;
    sum_sq += g * g;
  }
  const double n = static_cast<double>(pred.size());
  return std::max(0.0, sum_sq / n - (sum / n) * (sum / n));
}

namespace {

void check_latent(const LatentParams& p) {
  if (p.mu.size() != p.sigma.size() || p.mu.empty()) {
    throw Error(ErrorCode::kShapeMismatch, "latent mu and sigma must have equal, non-zero length");
  }
  for (double s : p.sigma) {
    if (!(s > 0.0)) throw Error(ErrorCode::kDomain, "latent sigma must be positive");
  }
}

}  // namespace

double kl_loss(const LatentParams& params, KlReduction reduction) {
  check_latent(params);
  double total = 0.0;
  for (std::size_t i = 0; i < params.mu.size(); ++i) {
    const double m = params.mu[i];
    const double s = params.sigma[i];
    total += -std::log(s) + 0.5 * (s * s + m * m) - 0.5;
  }
  return reduction == KlReduction::kMean ? total / static_cast<double>(params.mu.size()) : total;
}

KlGradient kl_loss_gradient(const LatentParams& params, KlReduction reduction) {
  check_latent(params);
  const double scale =
      reduction == KlReduction::kMean ? 1.0 / static_cast<double>(params.mu.size()) : 1.0;
  KlGradient g;
  for (std::size_t i = 0; i < params.mu.size(); ++i) {
    g.d_mu.push_back(scale * params.mu[i]);
    g.d_sigma.push_back(scale * (params.sigma[i] - 1.0 / params.sigma[i]));
  }
  return g;
}

std::vector<double> reparameterize(const LatentParams& params, std::span<const double> eps) {
  if (params.mu.size() != params.sigma.size() || eps.size() != params.mu.size()) {
    throw Error(ErrorCode::kShapeMismatch, "reparameterize: mu, sigma and eps lengths differ");
  }
  std::vector<double> z(eps.size());
  for (std::size_t i = 0; i < z.size(); ++i) z[i] = params.mu[i] + eps[i] * params.sigma[i];
  return z;
}

}  // namespace embodepth
