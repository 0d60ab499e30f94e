#include "embodepth/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <set>

#include <fmt/format.h>

namespace embodepth::synthetic {
namespace {

struct Ray {
  Eigen::Vector3d origin;     // camera centre, world frame
  Eigen::Vector3d direction;  // world frame, scaled so camera-frame z == 1
};

Ray make_ray(const CameraRig& rig, double u, double v) {
  const auto& k = rig.intrinsics;
  const Eigen::Vector3d dc((u - k.ox) / k.fx, (v - k.oy) / k.fy, 1.0);
  const Eigen::Matrix3d rt = rig.extrinsics.rotation.transpose();
  return {-(rt * rig.extrinsics.translation), rt * dc};
}

LabelId ground_label_for_column(int x, int width, double road_fraction) {
  const int road_cols = static_cast<int>(std::lround(width * road_fraction));
  const int begin = (width - road_cols) / 2;
  return (x >= begin && x < begin + road_cols) ? kRoadLabel : kSidewalkLabel;
}

SyntheticScene render(std::string name, const CameraRig& rig, const std::vector<BoxSpec>& boxes,
                      double road_fraction) {
  validate(rig);
  if (!(road_fraction > 0.0 && road_fraction <= 1.0)) {
    throw Error(ErrorCode::kDomain, "road_fraction must be in (0, 1]");
  }
  for (const auto& b : boxes) {
    if (!(b.width > 0 && b.depth > 0 && b.height > 0)) {
      throw Error(ErrorCode::kDomain, "box extents must be positive");
    }
    if (b.instance_id == 0) throw Error(ErrorCode::kDomain, "box instance ids must be non-zero");
  }

  SyntheticScene s;
  s.name = std::move(name);
  s.rig = rig;
  s.table = ClassTable::cityscapes();
  s.boxes = boxes;
  Grid<LabelId> labels(rig.width, rig.height_px, kSkyLabel);
  Grid<InstanceId> ids(rig.width, rig.height_px, 0);
  s.gt = DepthMap(rig.width, rig.height_px);

  for (int y = 0; y < rig.height_px; ++y) {
    for (int x = 0; x < rig.width; ++x) {
      const RayHit hit = cast_ray(rig, boxes, x, y);
      switch (hit.kind) {
        case HitKind::kNone:
          s.gt.set_sky(x, y);
          continue;
        case HitKind::kGround:
          labels(x, y) = ground_label_for_column(x, rig.width, road_fraction);
          break;
        case HitKind::kBox: {
          const auto& b = boxes[static_cast<std::size_t>(hit.box_index)];
          labels(x, y) = b.label;
          ids(x, y) = b.instance_id;
          break;
        }
      }
      if (hit.range > 0.0 && hit.range <= rig.max_range_m) {
        s.gt.set(x, y, static_cast<float>(hit.range));
      }
    }
  }
  s.seg = SegmentationMap(std::move(labels), s.table);
  s.instances = InstanceMap(std::move(ids), s.seg);
  return s;
}

}  // namespace

std::optional<double> intersect_ground_plane(const CameraRig& rig, double u, double v) {
  const Ray r = make_ray(rig, u, v);
  if (!(std::abs(r.direction.y()) > 0.0)) return std::nullopt;
  const double t = (rig.height_m - r.origin.y()) / r.direction.y();
  if (!(t > 0.0) || !std::isfinite(t)) return std::nullopt;
  return t;
}

std::optional<double> intersect_box(const CameraRig& rig, const BoxSpec& box, double u, double v) {
  const Ray r = make_ray(rig, u, v);
  const double lo[3] = {box.center_x - 0.5 * box.width, rig.height_m - box.height,
                        box.center_z - 0.5 * box.depth};
  const double hi[3] = {box.center_x + 0.5 * box.width, rig.height_m,
                        box.center_z + 0.5 * box.depth};
  double t_near = -std::numeric_limits<double>::infinity();
  double t_far = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 3; ++i) {
    const double o = r.origin[i];
    const double d = r.direction[i];
    if (d == 0.0) {
      if (o < lo[i] || o > hi[i]) return std::nullopt;
      continue;
    }
    double t1 = (lo[i] - o) / d;
    double t2 = (hi[i] - o) / d;
    if (t1 > t2) std::swap(t1, t2);
    t_near = std::max(t_near, t1);
    t_far = std::min(t_far, t2);
  }
  if (t_near > t_far || !(t_near > 0.0)) return std::nullopt;
  return t_near;
}

double range_from_t(const CameraRig& rig, double u, double v, double t) {
  if (rig.depth_mode == DepthMode::kZDepth) return t;
  const auto& k = rig.intrinsics;
  const double x = (u - k.ox) / k.fx;
  const double y = (v - k.oy) / k.fy;
  return t * std::sqrt(x * x + y * y + 1.0);
}

RayHit cast_ray(const CameraRig& rig, const std::vector<BoxSpec>& boxes, double u, double v) {
  RayHit best;
  if (auto t = intersect_ground_plane(rig, u, v)) {
    best.kind = HitKind::kGround;
    best.t = *t;
  }
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    auto t = intersect_box(rig, boxes[i], u, v);
    if (t && (best.kind == HitKind::kNone || *t <= best.t)) {
      best.kind = HitKind::kBox;
      best.t = *t;
      best.box_index = static_cast<int>(i);
    }
  }
  if (best.kind != HitKind::kNone) best.range = range_from_t(rig, u, v, best.t);
  return best;
}

SyntheticScene gen_flat_scene(const CameraRig& rig, double road_fraction) {
  return render("flat", rig, {}, road_fraction);
}

SyntheticScene gen_box_scene(const CameraRig& rig, const std::vector<BoxSpec>& boxes,
                             double road_fraction) {
  return render("boxes", rig, boxes, road_fraction);
}

SegmentationMap perturb_mask(const SegmentationMap& seg, const ClassTable& table, int k,
                             MorphOp op, std::uint32_t seed) {
  if (k < 0) throw Error(ErrorCode::kDomain, "perturbation radius must be >= 0");
  const Mask original = mask_for(seg, table, CategorySet::ground());
  if (k == 0) return seg;

  Mask current = original;
  const bool erode = op == MorphOp::kErode;
  for (int step = 0; step < k; ++step) {
    Mask next = current;
    for (int y = 0; y < seg.height(); ++y) {
      for (int x = 0; x < seg.width(); ++x) {
        if (current.test(x, y) != erode) continue;
        const int nx[4] = {x, x - 1, x + 1, x};
        const int ny[4] = {y - 1, y, y, y + 1};
        for (int n = 0; n < 4; ++n) {
          if (current.contains(nx[n], ny[n]) && current.test(nx[n], ny[n]) != erode) {
            next.set(x, y, !erode);
            break;
          }
        }
      }
    }
    current = std::move(next);
  }

  LabelId fallback_vertical = 0;
  bool have_vertical = false;
  for (const auto& [id, e] : table.entries()) {
    if (e.category == Category::kVertical) {
      fallback_vertical = id;
      have_vertical = true;
      break;
    }
  }

  std::mt19937 rng(seed);
  Grid<LabelId> labels = seg.labels();
  for (int y = 0; y < seg.height(); ++y) {
    for (int x = 0; x < seg.width(); ++x) {
      if (current.test(x, y) == original.test(x, y)) continue;
      std::set<LabelId> candidates;
      for (int dy = -k; dy <= k; ++dy) {
        for (int dx = -k; dx <= k; ++dx) {
          if (std::abs(dx) + std::abs(dy) > k || !seg.labels().contains(x + dx, y + dy)) continue;
          const LabelId l = seg(x + dx, y + dy);
          const bool is_ground = table.matches(l, CategorySet::ground());
          if (erode ? table.category(l) == Category::kVertical : is_ground) candidates.insert(l);
        }
      }
      if (candidates.empty()) {
        if (!erode || !have_vertical) {
          throw Error(ErrorCode::kConfig, "perturb_mask: no replacement label available");
        }
        candidates.insert(fallback_vertical);
      }
      auto it = candidates.begin();
      std::advance(it, static_cast<long>(rng() % candidates.size()));
      labels(x, y) = *it;
    }
  }
  return SegmentationMap(std::move(labels), table);
}

CameraRig fixture_rig(DepthMode mode) {
  CameraRig rig;
  rig.intrinsics = {360.0, 360.0, 320.0, 80.0};
  rig.height_m = 1.65;
  rig.width = 640;
  rig.height_px = 192;
  rig.depth_mode = mode;
  rig.max_range_m = 200.0;
  return rig;
}

std::vector<std::string> fixture_names() {
  return {"flat", "urban-3-box", "floating-object", "stacked-rider"};
}

SyntheticScene make_fixture(std::string_view name, DepthMode mode) {
  const CameraRig rig = fixture_rig(mode);
  const auto& t = ClassTable::cityscapes();
  auto id = [&t](std::string_view cls) { return *t.find_by_name(cls); };

  SyntheticScene s;
  if (name == "flat") {
    s = gen_flat_scene(rig, 0.5);
  } else if (name == "urban-3-box") {
    s = gen_box_scene(rig, {
                               {-2.0, 10.0, 1.8, 4.2, 1.6, id("car"), 1},
                               {3.5, 16.0, 2.5, 8.0, 3.2, id("truck"), 2},
                               {0.8, 7.0, 0.6, 0.6, 1.8, id("person"), 3},
                           });
  } else if (name == "floating-object") {
    // The car hides the bus's ground contact in every bus column.
    s = gen_box_scene(rig, {
                               {0.0, 8.0, 2.4, 2.0, 1.2, id("car"), 1},
                               {0.0, 14.0, 2.0, 2.0, 3.5, id("bus"), 2},
                           });
  } else if (name == "stacked-rider") {
    s = gen_box_scene(rig, {
                               {0.5, 9.0, 0.6, 1.8, 1.0, id("bicycle"), 1},
                               {0.5, 8.5, 0.5, 0.4, 1.9, id("rider"), 2},
                           });
  } else {
    throw Error(ErrorCode::kConfig, fmt::format("unknown fixture '{}'", name));
  }
  s.name = std::string(name);
  return s;
}

StageCounts oracle_stage_counts(const SyntheticScene& scene) {
  const CameraRig& rig = scene.rig;
  StageCounts c;
  for (int y = 0; y < rig.height_px; ++y) {
    for (int x = 0; x < rig.width; ++x) {
      const LabelId label = scene.seg(x, y);
      const Category cat = scene.table.category(label);
      if (cat != Category::kSky) ++c.scene;
      if (cat == Category::kVertical) ++c.extended_ground;
      const auto t = intersect_ground_plane(rig, x, y);
      if (!t) continue;
      const double range = range_from_t(rig, x, y, *t);
      if (!(range <= rig.max_range_m)) continue;
      ++c.surface;
      if (cat == Category::kRoad) ++c.road;
      if (cat == Category::kRoad || cat == Category::kFlatGround) ++c.ground;
    }
  }
  c.extended_ground += c.ground;
  return c;
}

nlohmann::json fixture_manifest(const SyntheticScene& scene) {
  nlohmann::json boxes = nlohmann::json::array();
  for (const auto& b : scene.boxes) {
    boxes.push_back({{"center_x", b.center_x},
                     {"center_z", b.center_z},
                     {"width", b.width},
                     {"depth", b.depth},
                     {"height", b.height},
                     {"label", b.label},
                     {"class", scene.table.at(b.label).name},
                     {"instance_id", b.instance_id}});
  }
  nlohmann::json histogram = nlohmann::json::object();
  for (const auto& [label, n] : scene.seg.histogram()) {
    histogram[scene.table.at(label).name] = n;
  }
  std::map<InstanceId, std::size_t> instance_pixels;
  for (auto id : scene.instances.ids().data()) {
    if (id != 0) ++instance_pixels[id];
  }
  nlohmann::json instances = nlohmann::json::object();
  for (const auto& [id, n] : instance_pixels) instances[std::to_string(id)] = n;

  const StageCounts c = oracle_stage_counts(scene);
  return {{"fixture", scene.name},
          {"width", scene.rig.width},
          {"height", scene.rig.height_px},
          {"depth_mode", std::string(to_string(scene.rig.depth_mode))},
          {"boxes", std::move(boxes)},
          {"label_histogram", std::move(histogram)},
          {"instance_pixels", std::move(instances)},
          {"gt_valid_pixels", scene.gt.valid_count()},
          {"sky_pixels", scene.gt.sky_count()},
          {"expected_stage_counts",
           {{"surface", c.surface},
            {"road", c.road},
            {"ground", c.ground},
            {"extended_ground", c.extended_ground},
            {"scene", c.scene}}},
          {"extended_count_exact", scene.name == "flat" || scene.name == "urban-3-box"}};
}

}  // namespace embodepth::synthetic
