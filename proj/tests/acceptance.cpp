// Acceptance suite: one PASS/FAIL/SKIP line per criterion, tolerances fixed here.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "embodepth/camera.hpp"
#include "embodepth/evaluation.hpp"
#include "embodepth/image_io.hpp"
#include "embodepth/kitti.hpp"
#include "embodepth/language.hpp"
#include "embodepth/metrics.hpp"
#include "embodepth/scene_depth.hpp"
#include "embodepth/synthetic.hpp"
#include "embodepth/telea.hpp"
#include "oracles.hpp"

using namespace embodepth;

namespace {

constexpr double kGeometryRelTol = 1e-4;
constexpr double kPipelineBudgetMs = 200.0;
constexpr double kSceneWithin5Min = 0.95;
constexpr double kRobustnessMaxPp = 2.0;
constexpr double kOracleTol = 1e-6;
constexpr double kGradTol = 1e-5;
constexpr double kTeleaConstTol = 1e-6;
constexpr double kTeleaRampFrac = 0.05;
constexpr double kKittiTarget = 0.9626;
constexpr double kKittiTolPp = 5.0;

enum class Outcome { kPass, kFail, kSkip };

struct Verdict {
  Outcome outcome;
  std::string detail;
};

Verdict fail(std::string d) { return {Outcome::kFail, std::move(d)}; }
Verdict check(bool ok, std::string d) { return {ok ? Outcome::kPass : Outcome::kFail, std::move(d)}; }

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

DepthMap full(int w, int h, float v) {
  DepthMap d(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) d.set(x, y, v);
  return d;
}

Verdict plane_geometry() {
  const auto s = synthetic::make_fixture("flat");
  const DepthMap surface = surface_depth(s.rig);
  const auto& k = s.rig.intrinsics;
  double worst = 0.0;
  std::size_t checked = 0;
  for (int y = 0; y < surface.height(); ++y) {
    for (int x = 0; x < surface.width(); ++x) {
      if (!surface.valid(x, y)) continue;
      const auto o = oracle::ray_plane(k.fx, k.fy, k.ox, k.oy, oracle::rot_x(0.0), {0, 0, 0},
                                       s.rig.height_m, x, y);
      if (!o) return fail(fmt::format("valid pixel ({}, {}) has no oracle hit", x, y));
      worst = std::max(worst, rel(surface.at(x, y), o->euclidean));
      ++checked;
    }
  }
  const auto bundle = run_pipeline(s.rig, s.seg, s.table);
  const Mask road = mask_for(s.seg, s.table, CategorySet::road());
  const auto dist = error_distribution(bundle.road, s.gt, &road);

  const CameraRig rig = kitti::reference_rig();
  std::vector<synthetic::BoxSpec> boxes = {{-3.0, 12.0, 1.8, 4.2, 1.5, 26, 1},
                                           {2.5, 20.0, 2.5, 8.0, 3.2, 27, 2},
                                           {0.8, 8.0, 0.6, 0.6, 1.8, 24, 3}};
  const auto big = synthetic::gen_box_scene(rig, boxes);
  std::vector<double> times;
  for (int i = 0; i < 5; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto b = run_pipeline(big.rig, big.seg, big.table);
    const auto t1 = std::chrono::steady_clock::now();
    times.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  const double ms = oracle::median(times);
  return check(worst <= kGeometryRelTol && checked > 0 && dist.pct_within_5 == 1.0 &&
                   dist.pct_within_10 == 1.0 && ms < kPipelineBudgetMs,
               fmt::format("max rel err {:.2e} over {} px; road dist ({}, {}); {}x{} pipeline median {:.1f} ms",
                           worst, checked, dist.pct_within_5, dist.pct_within_10, rig.width,
                           rig.height_px, ms));
}

Verdict nesting() {
  std::string detail;
  std::size_t total = 0;
  for (const auto& n : synthetic::fixture_names()) {
    for (DepthMode mode : {DepthMode::kEuclidean, DepthMode::kZDepth}) {
      const auto s = synthetic::make_fixture(n, mode);
      const std::size_t v = count_nesting_violations(run_pipeline(s.rig, s.seg, s.table));
      total += v;
      if (mode == DepthMode::kEuclidean) detail += fmt::format("{}={} ", n, v);
    }
  }
  return check(total == 0, detail + fmt::format("(both depth modes, total {})", total));
}

Verdict vertical_extension() {
  const auto s = synthetic::make_fixture("urban-3-box", DepthMode::kZDepth);
  const auto b = run_pipeline(s.rig, s.seg, s.table);
  std::size_t non_sky = 0, good = 0, faces = 0, faces_good = 0;
  for (int y = 0; y < s.gt.height(); ++y) {
    for (int x = 0; x < s.gt.width(); ++x) {
      if (!s.gt.valid(x, y)) continue;
      ++non_sky;
      const bool ok = b.scene.valid(x, y) && rel(b.scene.at(x, y), s.gt.at(x, y)) <= 0.05;
      good += ok;
      const InstanceId id = s.instances(x, y);
      if (id == 0) continue;
      const auto& box = *std::find_if(s.boxes.begin(), s.boxes.end(),
                                      [&](const auto& bx) { return bx.instance_id == id; });
      // every fixture box stands on the ground; its front face is the plane z = cz - depth/2
      const double front = box.center_z - 0.5 * box.depth;
      if (std::abs(s.gt.at(x, y) - front) > 1e-4) continue;
      ++faces;
      faces_good += ok;
    }
  }
  const double frac = double(good) / non_sky;
  return check(frac >= kSceneWithin5Min && faces > 0 && faces_good == faces,
               fmt::format("{:.2f}% of {} non-sky px within 5%; front faces {}/{}", 100 * frac,
                           non_sky, faces_good, faces));
}

Verdict robustness() {
  const auto s = synthetic::make_fixture("flat");
  const auto pct10 = [&](const SegmentationMap& seg) {
    const auto b = run_pipeline(s.rig, seg, s.table);
    const Mask road = mask_for(seg, s.table, CategorySet::road());
    return error_distribution(b.scene, s.gt, &road, EvalRange{1e-3, 80.0, std::nullopt}).pct_within_10;
  };
  const double base = pct10(s.seg);
  double worst = 0.0;
  for (int k = 1; k <= 2; ++k)
    for (auto op : {synthetic::MorphOp::kErode, synthetic::MorphOp::kDilate})
      for (std::uint32_t seed : {1u, 2u, 3u})
        worst = std::max(worst, 100 * std::abs(pct10(synthetic::perturb_mask(s.seg, s.table, k, op, seed)) - base));
  return check(worst < kRobustnessMaxPp,
               fmt::format("baseline {:.4f}; max change {:.3f} pp over k=1..2 erode/dilate", base, worst));
}

Verdict metric_oracles() {
  std::mt19937 rng(2024);
  std::uniform_real_distribution<double> g(0.5, 79.0), ratio(0.6, 1.6), u(0.0, 1.0);
  std::uniform_real_distribution<double> mu(-3.0, 3.0), sigma(0.1, 4.0);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int w = 8 + int(rng() % 25), h = 8 + int(rng() % 25);
    DepthMap pred(w, h), gt(w, h);
    std::vector<double> pv, gv;
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const double gval = g(rng), pval = gval * ratio(rng);
        const bool gok = u(rng) > 0.1, pok = u(rng) > 0.1;
        if (gok) gt.set(x, y, float(gval));
        if (pok) pred.set(x, y, float(pval));
        if (gok && pok) {
          pv.push_back(float(pval));
          gv.push_back(float(gval));
        }
      }
    }
    const auto ref = oracle::metrics(pv, gv);
    const auto m = depth_metrics(pred, gt);
    const auto d = error_distribution(pred, gt);
    for (auto [a, b] : {std::pair{m.abs_rel, ref.abs_rel}, {m.sq_rel, ref.sq_rel}, {m.rmse, ref.rmse},
                        {m.rmse_log, ref.rmse_log}, {m.delta1, ref.d1}, {m.delta2, ref.d2},
                        {m.delta3, ref.d3}, {d.pct_within_5, ref.within5}, {d.pct_within_10, ref.within10}})
      worst = std::max(worst, std::abs(a - b));
    worst = std::max(worst, std::abs(silog_loss(pv, gv) - oracle::silog(pv, gv)));
    LatentParams lp;
    for (std::size_t i = 0; i < 1 + rng() % 32; ++i) {
      lp.mu.push_back(mu(rng));
      lp.sigma.push_back(sigma(rng));
    }
    worst = std::max(worst, std::abs(kl_loss(lp) - oracle::kl(lp.mu, lp.sigma)));
  }

  std::size_t violations = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> p(8 + rng() % 56), q(p.size());
    DepthMap pm(8, 8), gm(8, 8);
    for (int i = 0; i < 64; ++i) {
      pm.set(i % 8, i / 8, float(g(rng)));
      gm.set(i % 8, i / 8, float(g(rng)));
    }
    const auto m = depth_metrics(pm, gm, nullptr, EvalRange::unbounded());
    violations += !(m.delta1 <= m.delta2 && m.delta2 <= m.delta3);
    for (std::size_t i = 0; i < p.size(); ++i) {
      p[i] = g(rng);
      q[i] = g(rng);
    }
    const double s = std::exp(std::uniform_real_distribution<double>(-4.0, 4.0)(rng));
    std::vector<double> ps(p);
    for (auto& v : ps) v *= s;
    violations += std::abs(silog_loss(ps, q) - silog_loss(p, q)) > 1e-9;
  }
  return check(worst <= kOracleTol && violations == 0,
               fmt::format("max |diff| {:.2e} over 100 cases; {} property violations in 1000", worst,
                           violations));
}

Verdict closed_forms() {
  std::vector<std::string> bad;
  if (kl_loss({{0.0}, {1.0}}) != 0.0) bad.push_back("kl(0,1)");
  if (kl_loss({{1.0}, {1.0}}) != 0.5) bad.push_back("kl(1,1)");
  const LatentParams lp{{0.7, -1.2, 3.0}, {0.4, 1.3, 2.2}};
  if (reparameterize(lp, std::vector<double>(3, 0.0)) != lp.mu) bad.push_back("reparameterize");

  const Intrinsics k{720.0, 720.0, 621.0, 187.5};
  const auto a = backproject_aligned(k, 1.5, k.ox, k.oy + k.fy);
  if (a.camera != Eigen::Vector3d(0, 1.5, 1.5)) bad.push_back("(0,1.5,1.5)");
  const auto b = backproject_aligned(k, 2.0, k.ox + k.fx, k.oy + k.fy);
  if (b.camera != Eigen::Vector3d(2, 2, 2)) bad.push_back("(2,2,2)");
  const auto sol = solve_world_on_plane(projection_matrix(k, {}), k.ox, k.oy + k.fy, 1.5);
  if (std::abs(sol.xw) > 1e-12 || std::abs(sol.zw - 1.5) > 1e-12 || std::abs(sol.zc - 1.5) > 1e-12)
    bad.push_back("plane solve");
  if (std::abs(ground_range(a, DepthMode::kEuclidean) - 1.5 * std::sqrt(2.0)) > 1e-12) bad.push_back("range");
  if (std::abs(ground_range(b, DepthMode::kEuclidean) - 2.0 * std::sqrt(3.0)) > 1e-12) bad.push_back("range");

  std::mt19937 rng(3);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    LatentParams p;
    for (int i = 0; i < 6; ++i) {
      p.mu.push_back(std::uniform_real_distribution<double>(-2, 2)(rng));
      p.sigma.push_back(std::uniform_real_distribution<double>(0.2, 3)(rng));
    }
    const auto grad = kl_loss_gradient(p);
    for (std::size_t i = 0; i < 6; ++i) {
      const double h = 1e-6;
      LatentParams hi = p, lo = p;
      hi.mu[i] += h;
      lo.mu[i] -= h;
      worst = std::max(worst, std::abs(grad.d_mu[i] - (kl_loss(hi) - kl_loss(lo)) / (2 * h)));
      hi = p;
      lo = p;
      hi.sigma[i] += h;
      lo.sigma[i] -= h;
      worst = std::max(worst, std::abs(grad.d_sigma[i] - (kl_loss(hi) - kl_loss(lo)) / (2 * h)));
    }
  }
  if (worst > kGradTol) bad.push_back("kl gradient");
  std::string list;
  for (const auto& s : bad) list += s + " ";
  return check(bad.empty(), bad.empty() ? fmt::format("all exact; kl gradient max err {:.1e}", worst)
                                        : "mismatch: " + list);
}

Verdict telea() {
  double const_err = 0.0;
  for (float c : {0.5f, 3.25f, 42.0f}) {
    DepthMap d = full(24, 24, c);
    for (int y = 6; y < 17; ++y)
      for (int x = 4; x < 15; ++x) d.invalidate(x, y);
    const DepthMap out = inpaint_telea(d, 5);
    for (int y = 0; y < 24; ++y)
      for (int x = 0; x < 24; ++x) const_err = std::max(const_err, std::abs(double(out.at(x, y)) - c));
  }

  DepthMap ramp(40, 30);
  for (int y = 0; y < 30; ++y)
    for (int x = 0; x < 40; ++x) ramp.set(x, y, 2.0f + 0.5f * x);
  for (int y = 5; y < 25; ++y)
    for (int x = 18; x < 21; ++x) ramp.invalidate(x, y);
  const DepthMap filled = inpaint_telea(ramp, 5);
  const double span = 0.5 * (21 - 17);
  double ramp_err = 0.0;
  for (int y = 5; y < 25; ++y)
    for (int x = 18; x < 21; ++x) ramp_err = std::max(ramp_err, std::abs(filled.at(x, y) - (2.0 + 0.5 * x)));

  std::mt19937 rng(17);
  bool preserved = true, deterministic = true;
  for (int trial = 0; trial < 20; ++trial) {
    DepthMap d(32, 24);
    for (int y = 0; y < 24; ++y)
      for (int x = 0; x < 32; ++x)
        if (rng() % 3) d.set(x, y, std::uniform_real_distribution<float>(0.5f, 80.0f)(rng));
    const DepthMap a = inpaint_telea(d, 4);
    const DepthMap b = inpaint_telea(d, 4);
    deterministic &= a == b;
    for (int y = 0; y < 24; ++y)
      for (int x = 0; x < 32; ++x)
        if (d.valid(x, y)) preserved &= std::bit_cast<std::uint32_t>(a.at(x, y)) == std::bit_cast<std::uint32_t>(d.at(x, y));
  }
  return check(const_err <= kTeleaConstTol && ramp_err < kTeleaRampFrac * span && preserved && deterministic,
               fmt::format("constant err {:.1e}; ramp err {:.4f} ({:.2f}% of span); bit-preserved {}; "
                           "deterministic {}",
                           const_err, ramp_err, 100 * ramp_err / span, preserved, deterministic));
}

Verdict descriptions() {
  ObjectDepth o;
  o.depth_m = 7.0;
  o.rank = 1;
  bool golden = render_description(o) ==
                "This object seems to be 7.0 meters and ranks as the 1-st farthest in distance.";
  o.depth_m = 12.34;
  o.rank = 3;
  golden &= render_description(o) ==
            "This object seems to be 12.3 meters and ranks as the 3-rd farthest in distance.";
  o.depth_m = 25.0;
  o.rank = 12;
  golden &= render_description(o) ==
            "This object seems to be 25.0 meters and ranks as the 12-th farthest in distance.";

  std::mt19937 rng(1000);
  std::size_t bad = 0;
  const ClassTable table = ClassTable::cityscapes();
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 1 + int(rng() % 15);
    Grid<LabelId> labels(n, 1, 26);
    Grid<InstanceId> ids(n, 1, 0);
    DepthMap d(n, 1);
    for (int i = 0; i < n; ++i) {
      ids(i, 0) = InstanceId(i + 1);
      d.set(i, 0, rng() % 5 == 0 ? 9.0f : std::uniform_real_distribution<float>(0.5f, 80.0f)(rng));
    }
    const SegmentationMap seg(labels, table);
    const auto objs = object_depths(d, InstanceMap(ids, seg), seg, table, {1});
    std::vector<int> ranks;
    for (const auto& x : objs) ranks.push_back(x.rank);
    std::sort(ranks.begin(), ranks.end());
    std::vector<int> want(n);
    std::iota(want.begin(), want.end(), 1);
    bad += ranks != want;
  }
  return check(golden && bad == 0,
               fmt::format("template byte-exact {}; {} non-permutations in 1000", golden, bad));
}

// Needs EMBODEPTH_KITTI_EVAL pointing at an `evaluate` JSON produced with
// --seg-dir for the 2011-09-26 drives.
Verdict kitti_drive() {
  const char* path = std::getenv("EMBODEPTH_KITTI_EVAL");
  if (!path || !std::filesystem::exists(path))
    return {Outcome::kSkip, "set EMBODEPTH_KITTI_EVAL to an evaluate JSON for 2011-09-26"};
  const auto doc = nlohmann::json::parse(read_binary_file(path));
  const nlohmann::json* regions = &doc.at("aggregate");
  if (doc.contains("groups") && doc.at("groups").contains("2011-09-26")) regions = &doc.at("groups").at("2011-09-26");
  for (const auto& r : *regions) {
    if (r.at("region") != "road") continue;
    const double p10 = r.at("distribution").at("pct_within_10");
    return check(std::abs(p10 - kKittiTarget) * 100 <= kKittiTolPp,
                 fmt::format("road pct_within_10 {:.4f} vs 0.9626", p10));
  }
  return fail("no road region in the evaluation");
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
      {"plane-geometry", plane_geometry},
      {"stage-nesting", nesting},
      {"vertical-extension", vertical_extension},
      {"segmentation-robustness", robustness},
      {"metric-oracles", metric_oracles},
      {"closed-form-values", closed_forms},
      {"telea", telea},
      {"descriptions", descriptions},
      {"kitti-2011-09-26", kitti_drive},
  };
  int failures = 0;
  for (const auto& [name, fn] : criteria) {
    Verdict v;
    try {
      v = fn();
    } catch (const std::exception& e) {
      v = fail(std::string("exception: ") + e.what());
    }
    const char* tag = v.outcome == Outcome::kPass ? "PASS" : v.outcome == Outcome::kFail ? "FAIL" : "SKIP";
    std::cout << fmt::format("{} {}: {}\n", tag, name, v.detail);
    failures += v.outcome == Outcome::kFail;
  }
  std::cout << fmt::format("{} failed\n", failures);
  return failures == 0 ? 0 : 1;
}
