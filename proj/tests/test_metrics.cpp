#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "embodepth/metrics.hpp"
#include "oracles.hpp"

using namespace embodepth;

namespace {

struct Pair {
  DepthMap pred;
  DepthMap gt;
};

Pair random_pair(std::mt19937& rng, int w, int h, double invalid_fraction = 0.15) {
  std::uniform_real_distribution<double> g(0.5, 79.0), ratio(0.6, 1.6), u(0.0, 1.0);
  Pair p{DepthMap(w, h), DepthMap(w, h)};
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double gv = g(rng);
      if (u(rng) > invalid_fraction) p.gt.set(x, y, static_cast<float>(gv));
      if (u(rng) > invalid_fraction) p.pred.set(x, y, static_cast<float>(gv * ratio(rng)));
    }
  }
  return p;
}

void samples(const Pair& p, std::vector<double>& pred, std::vector<double>& gt,
             const Mask* mask = nullptr, double lo = 1e-3, double hi = 80.0) {
  for (int y = 0; y < p.gt.height(); ++y) {
    for (int x = 0; x < p.gt.width(); ++x) {
      if (!p.gt.valid(x, y) || !p.pred.valid(x, y)) continue;
      if (mask && !mask->test(x, y)) continue;
      const double g = p.gt.at(x, y);
      if (g < lo || g > hi) continue;
      pred.push_back(p.pred.at(x, y));
      gt.push_back(g);
    }
  }
}

DepthMap scaled(const DepthMap& d, double s) {
  DepthMap out(d.width(), d.height());
  for (int y = 0; y < d.height(); ++y)
    for (int x = 0; x < d.width(); ++x)
      if (d.valid(x, y)) out.set(x, y, static_cast<float>(d.at(x, y) * s));
  return out;
}

}  // namespace

TEST(DepthMetrics, Identity) {
  std::mt19937 rng(1);
  const Pair p = random_pair(rng, 12, 9);
  const auto m = depth_metrics(p.gt, p.gt);
  EXPECT_EQ(m.abs_rel, 0.0);
  EXPECT_EQ(m.sq_rel, 0.0);
  EXPECT_EQ(m.rmse, 0.0);
  EXPECT_EQ(m.rmse_log, 0.0);
  EXPECT_EQ(m.delta1, 1.0);
  EXPECT_EQ(m.delta3, 1.0);
  EXPECT_EQ(m.n_pixels, p.gt.valid_count());
}

TEST(DepthMetrics, DoubledPrediction) {
  std::mt19937 rng(2);
  const Pair p = random_pair(rng, 10, 10, 0.0);
  const auto m = depth_metrics(scaled(p.gt, 2.0), p.gt, nullptr, EvalRange::unbounded());
  EXPECT_NEAR(m.abs_rel, 1.0, 1e-6);
  EXPECT_EQ(m.delta1, 0.0);
  EXPECT_EQ(m.delta2, 0.0);
  EXPECT_EQ(m.delta3, 0.0);
}

TEST(DepthMetrics, MatchesScalarLoop) {
  std::mt19937 rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const int w = 8 + static_cast<int>(rng() % 25), h = 8 + static_cast<int>(rng() % 25);
    const Pair p = random_pair(rng, w, h);
    Mask mask(w, h);
    for (auto& v : mask.data()) v = rng() % 4 != 0;
    const Mask* mp = trial % 2 ? &mask : nullptr;
    std::vector<double> pv, gv;
    samples(p, pv, gv, mp, 1e-3, 60.0);
    const auto ref = oracle::metrics(pv, gv);
    const auto m = depth_metrics(p.pred, p.gt, mp, {1e-3, 60.0, std::nullopt});
    EXPECT_EQ(m.n_pixels, pv.size());
    EXPECT_NEAR(m.abs_rel, ref.abs_rel, 1e-6);
    EXPECT_NEAR(m.sq_rel, ref.sq_rel, 1e-6);
    EXPECT_NEAR(m.rmse, ref.rmse, 1e-6);
    EXPECT_NEAR(m.rmse_log, ref.rmse_log, 1e-6);
    EXPECT_NEAR(m.delta1, ref.d1, 1e-6);
    EXPECT_NEAR(m.delta2, ref.d2, 1e-6);
    EXPECT_NEAR(m.delta3, ref.d3, 1e-6);
    const auto d = error_distribution(p.pred, p.gt, mp, {1e-3, 60.0, std::nullopt});
    EXPECT_NEAR(d.pct_within_5, ref.within5, 1e-6);
    EXPECT_NEAR(d.pct_within_10, ref.within10, 1e-6);
  }
}

TEST(DepthMetrics, DeltaProperties) {
  std::mt19937 rng(4);
  for (int trial = 0; trial < 1000; ++trial) {
    const Pair p = random_pair(rng, 8, 8, 0.05);
    MetricsReport m, swapped;
    try {
      m = depth_metrics(p.pred, p.gt, nullptr, EvalRange::unbounded());
      swapped = depth_metrics(p.gt, p.pred, nullptr, EvalRange::unbounded());
    } catch (const Error&) {
      continue;
    }
    ASSERT_LE(m.delta1, m.delta2);
    ASSERT_LE(m.delta2, m.delta3);
    ASSERT_EQ(m.delta1, swapped.delta1);
    ASSERT_EQ(m.delta2, swapped.delta2);
    ASSERT_EQ(m.delta3, swapped.delta3);
    const auto d = error_distribution(p.pred, p.gt);
    ASSERT_LE(d.pct_within_5, d.pct_within_10);
  }
}

TEST(DepthMetrics, CropAndRange) {
  DepthMap gt(4, 4), pred(4, 4);
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 4; ++x) {
      gt.set(x, y, 10.0f + x);
      pred.set(x, y, x == 0 ? 20.0f : 10.0f + x);
    }
  EXPECT_GT(depth_metrics(pred, gt).abs_rel, 0.0);
  EXPECT_EQ(depth_metrics(pred, gt, nullptr, {1e-3, 80.0, CropRect{0, 4, 1, 4}}).abs_rel, 0.0);
  EXPECT_EQ(depth_metrics(pred, gt, nullptr, {10.5, 80.0, std::nullopt}).abs_rel, 0.0);
  EXPECT_THROW(depth_metrics(pred, gt, nullptr, {100.0, 200.0, std::nullopt}), Error);
  EXPECT_THROW(depth_metrics(DepthMap(3, 4), gt), Error);
}

TEST(DepthMetrics, MedianScaling) {
  std::mt19937 rng(6);
  const Pair p = random_pair(rng, 10, 10, 0.0);
  const auto m = depth_metrics(scaled(p.gt, 3.0), p.gt, nullptr, EvalRange::unbounded(), true);
  EXPECT_NEAR(m.abs_rel, 0.0, 1e-6);
}

TEST(ErrorDistribution, HandCases) {
  std::mt19937 rng(7);
  const Pair p = random_pair(rng, 10, 10, 0.0);
  auto d = error_distribution(p.gt, p.gt);
  EXPECT_EQ(d.pct_within_5, 1.0);
  EXPECT_EQ(d.pct_within_10, 1.0);
  d = error_distribution(scaled(p.gt, 1.07), p.gt);
  EXPECT_EQ(d.pct_within_5, 0.0);
  EXPECT_EQ(d.pct_within_10, 1.0);
  DepthMap half = p.gt;
  for (int y = 0; y < 10; ++y)
    for (int x = 0; x < 5; ++x) half.set(x, y, p.gt.at(x, y) * 1.2f);
  d = error_distribution(half, p.gt);
  EXPECT_EQ(d.pct_within_5, 0.5);
  EXPECT_EQ(d.pct_within_10, 0.5);
  EXPECT_THROW(error_distribution(DepthMap(10, 10), p.gt), Error);
}

TEST(GargCrop, Fractions) {
  EXPECT_EQ(garg_crop(1242, 375), (CropRect{153, 371, 44, 1197}));
  EXPECT_EQ(garg_crop(100, 100), (CropRect{40, 99, 3, 96}));
  for (int w = 4; w < 300; w += 7) {
    for (int h = 4; h < 300; h += 11) {
      const auto c = garg_crop(w, h);
      EXPECT_GE(c.row_begin, 0);
      EXPECT_LE(c.row_end, h);
      EXPECT_GE(c.col_begin, 0);
      EXPECT_LE(c.col_end, w);
      EXPECT_LT(c.row_begin, c.row_end);
      EXPECT_LT(c.col_begin, c.col_end);
    }
  }
  EXPECT_THROW(garg_crop(1, 1), Error);
}

TEST(Resize, SameSizeIsIdentityAndConstantStaysConstant) {
  std::mt19937 rng(8);
  const Pair p = random_pair(rng, 9, 7);
  EXPECT_EQ(resize_bilinear_valid(p.gt, 9, 7), p.gt);
  DepthMap c(6, 4);
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 6; ++x) c.set(x, y, 5.0f);
  c.invalidate(2, 2);
  const DepthMap up = resize_bilinear_valid(c, 12, 8);
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 12; ++x) {
      ASSERT_TRUE(up.valid(x, y));
      EXPECT_FLOAT_EQ(up.at(x, y), 5.0f);
    }
}

TEST(Resize, LinearRampUpsampled) {
  DepthMap d(4, 1);
  for (int x = 0; x < 4; ++x) d.set(x, 0, 1.0f + x);
  const DepthMap up = resize_bilinear_valid(d, 8, 1);
  // half-pixel centres: output x maps to (x + 0.5) / 2 - 0.5
  for (int x = 1; x < 7; ++x) EXPECT_NEAR(up.at(x, 0), 1.0 + ((x + 0.5) / 2.0 - 0.5), 1e-6);
}

TEST(Silog, HandValuesAndScaleInvariance) {
  const std::vector<double> gt = {1.0, 1.0}, pred = {1.0, std::exp(1.0)};
  EXPECT_NEAR(silog_loss(pred, gt), 0.25, 1e-12);
  EXPECT_EQ(silog_loss(gt, gt), 0.0);
  std::mt19937 rng(9);
  std::uniform_real_distribution<double> v(0.1, 90.0), c(0.01, 100.0);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> p(1 + rng() % 64), g(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
      p[i] = v(rng);
      g[i] = v(rng);
    }
    const double s = c(rng);
    std::vector<double> ps(p);
    for (auto& x : ps) x *= s;
    ASSERT_NEAR(silog_loss(ps, g), silog_loss(p, g), 1e-9);
    ASSERT_GE(silog_loss(p, g), 0.0);
    std::vector<double> gs(g);
    for (auto& x : gs) x *= s;
    ASSERT_NEAR(silog_loss(g, gs), 0.0, 1e-9);
  }
}

TEST(Silog, MatchesScalarLoop) {
  std::mt19937 rng(10);
  std::uniform_real_distribution<double> v(0.1, 90.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> p(64 + rng() % 960), g(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
      p[i] = v(rng);
      g[i] = v(rng);
    }
    EXPECT_NEAR(silog_loss(p, g), oracle::silog(p, g), 1e-6);
  }
  EXPECT_THROW(silog_loss(std::vector<double>{1.0}, std::vector<double>{1.0, 2.0}), Error);
  EXPECT_THROW(silog_loss(std::vector<double>{0.0}, std::vector<double>{1.0}), Error);
}

TEST(Kl, HandValues) {
  EXPECT_EQ(kl_loss({{0.0}, {1.0}}), 0.0);
  EXPECT_EQ(kl_loss({{1.0}, {1.0}}), 0.5);
  EXPECT_NEAR(kl_loss({{0.0}, {2.0}}), -std::log(2.0) + 2.0 - 0.5, 1e-12);
  EXPECT_NEAR(kl_loss({{1.0, 0.0}, {1.0, 2.0}}, KlReduction::kSum), 0.5 + 2.0 - std::log(2.0) - 0.5, 1e-12);
  EXPECT_THROW(kl_loss({{0.0}, {0.0}}), Error);
  EXPECT_THROW(kl_loss({{0.0, 1.0}, {1.0}}), Error);
}

TEST(Kl, MatchesScalarLoopAndGradient) {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> mu(-3.0, 3.0), sigma(0.1, 4.0);
  for (int trial = 0; trial < 100; ++trial) {
    LatentParams p;
    const std::size_t n = 1 + rng() % 32;
    for (std::size_t i = 0; i < n; ++i) {
      p.mu.push_back(mu(rng));
      p.sigma.push_back(sigma(rng));
    }
    EXPECT_NEAR(kl_loss(p), oracle::kl(p.mu, p.sigma), 1e-6);
    EXPECT_GE(kl_loss(p), 0.0);
    for (KlReduction red : {KlReduction::kMean, KlReduction::kSum}) {
      const auto g = kl_loss_gradient(p, red);
      const double h = 1e-6;
      for (std::size_t i = 0; i < n; ++i) {
        LatentParams a = p, b = p;
        a.mu[i] += h;
        b.mu[i] -= h;
        EXPECT_NEAR(g.d_mu[i], (kl_loss(a, red) - kl_loss(b, red)) / (2 * h), 1e-5);
        a = p;
        b = p;
        a.sigma[i] += h;
        b.sigma[i] -= h;
        EXPECT_NEAR(g.d_sigma[i], (kl_loss(a, red) - kl_loss(b, red)) / (2 * h), 1e-5);
      }
      if (red == KlReduction::kSum) {
        for (std::size_t i = 0; i < n; ++i) {
          EXPECT_NEAR(g.d_mu[i], p.mu[i], 1e-12);
          EXPECT_NEAR(g.d_sigma[i], p.sigma[i] - 1.0 / p.sigma[i], 1e-12);
        }
      }
    }
  }
}

TEST(Reparameterize, HandValues) {
  const LatentParams p{{1.0, -2.0}, {2.0, 0.5}};
  EXPECT_EQ(reparameterize(p, std::vector<double>{0.0, 0.0}), p.mu);
  const LatentParams unit{{0.0, 0.0}, {1.0, 1.0}};
  const std::vector<double> eps = {0.3, -1.7};
  EXPECT_EQ(reparameterize(unit, eps), eps);
  EXPECT_EQ(reparameterize({{1.0}, {2.0}}, std::vector<double>{0.5}), std::vector<double>{2.0});
  EXPECT_THROW(reparameterize(p, std::vector<double>{0.0}), Error);
}

TEST(MetricsJson, RoundTrip) {
  const MetricsReport m{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 42};
  nlohmann::json j = m;
  const auto back = j.get<MetricsReport>();
  EXPECT_EQ(back.abs_rel, m.abs_rel);
  EXPECT_EQ(back.delta3, m.delta3);
  EXPECT_EQ(back.n_pixels, 42u);
  const ErrorDistribution d{0.25, 0.75, 8};
  nlohmann::json jd = d;
  EXPECT_EQ(jd.at("pct_within_5"), 0.25);
  EXPECT_EQ(jd.get<ErrorDistribution>().pct_within_10, 0.75);
}
