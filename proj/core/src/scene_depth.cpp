#include "embodepth/scene_depth.hpp"

#include <bit>
#include <cstdint>

#include <fmt/format.h>

#include "embodepth/telea.hpp"

namespace embodepth {

std::string_view to_string(Stage stage) {
  switch (stage) {
    case Stage::kSurface: return "surface";
    case Stage::kRoad: return "road";
    case Stage::kGround: return "ground";
    case Stage::kExtendedGround: return "extended_ground";
    case Stage::kScene: return "scene";
  }
  return "scene";
}

Stage parse_stage(std::string_view text) {
  for (Stage s : kAllStages) {
    if (text == to_string(s)) return s;
  }
  throw Error(ErrorCode::kConfig, fmt::format("unknown stage '{}'", text));
}

const DepthMap& EmbodiedDepthBundle::stage(Stage s) const {
  switch (s) {
    case Stage::kSurface: return surface;
    case Stage::kRoad: return road;
    case Stage::kGround: return ground;
    case Stage::kExtendedGround: return extended_ground;
    case Stage::kScene: return scene;
  }
  return scene;
}

namespace {

DepthMap keep_masked(const DepthMap& surface, const Mask& mask, const char* what) {
  require_same_shape(surface, mask, what);
  DepthMap out(surface.width(), surface.height());
  for (int y = 0; y < surface.height(); ++y) {
    for (int x = 0; x < surface.width(); ++x) {
      if (mask.test(x, y) && surface.valid(x, y)) out.set(x, y, surface.at(x, y));
    }
  }
  return out;
}

}  // namespace

DepthMap road_depth(const DepthMap& surface, const Mask& road_mask) {
  return keep_masked(surface, road_mask, "road depth");
}

DepthMap ground_depth(const DepthMap& surface, const Mask& ground_mask) {
  return keep_masked(surface, ground_mask, "ground depth");
}

DepthMap extend_vertical(const DepthMap& ground, const SegmentationMap& seg,
                         const ClassTable& table) {
  require_same_shape(ground, seg, "vertical extension");
  DepthMap out = ground;
  const int h = seg.height();
  for (int x = 0; x < seg.width(); ++x) {
    // Walk upward so the run beneath is resolved before the run above it.
    // support_depth holds the depth given to the run that ended just below y.
    float support_depth = 0.0f;
    bool support_is_run = false;
    int y = h - 1;
    while (y >= 0) {
      const LabelId label = seg(x, y);
      if (table.category(label) != Category::kVertical) {
        support_is_run = false;
        --y;
        continue;
      }
      const int bottom = y;
      while (y >= 0 && seg(x, y) == label) --y;
      const int top = y + 1;

      bool have_depth = false;
      float depth = 0.0f;
      const int below = bottom + 1;
      if (below < h && ground.valid(x, below)) {
        depth = ground.at(x, below);
        have_depth = true;
      } else if (below < h && support_is_run) {
        depth = support_depth;
        have_depth = true;
      }

      if (have_depth) {
        for (int r = top; r <= bottom; ++r) {
          if (!out.valid(x, r)) out.set(x, r, depth);
        }
      }
      support_is_run = have_depth;
      support_depth = depth;
    }
  }
  return out;
}

DepthMap compose_scene(const DepthMap& extended, const SegmentationMap& seg,
                       const ClassTable& table, int radius) {
  require_same_shape(extended, seg, "scene composition");
  DepthMap with_sky = extended;
  for (int y = 0; y < seg.height(); ++y) {
    for (int x = 0; x < seg.width(); ++x) {
      if (table.category(seg(x, y)) == Category::kSky && !with_sky.valid(x, y)) {
        with_sky.set_sky(x, y);
      }
    }
  }
  return inpaint_telea(with_sky, radius);
}

EmbodiedDepthBundle run_pipeline(const CameraRig& rig, const SegmentationMap& seg,
                                 const ClassTable& table, const PipelineOptions& options) {
  Stage current = Stage::kSurface;
  try {
    if (rig.width != seg.width() || rig.height_px != seg.height()) {
      throw Error(ErrorCode::kDimensionMismatch,
                  fmt::format("camera is {}x{} but label map is {}x{}", rig.width, rig.height_px,
                              seg.width(), seg.height()));
    }
    EmbodiedDepthBundle b;
    b.surface = surface_depth(rig);
    current = Stage::kRoad;
    b.road = road_depth(b.surface, mask_for(seg, table, CategorySet::road()));
    current = Stage::kGround;
    b.ground = ground_depth(b.surface, mask_for(seg, table, CategorySet::ground()));
    current = Stage::kExtendedGround;
    b.extended_ground = extend_vertical(b.ground, seg, table);
    current = Stage::kScene;
    b.scene = compose_scene(b.extended_ground, seg, table, options.inpaint_radius);
    return b;
  } catch (const Error& e) {
    throw Error(e.code(), fmt::format("stage {}: {}", to_string(current), e.what()));
  }
}

std::size_t count_nesting_violations(const EmbodiedDepthBundle& b) {
  const DepthMap* chain[] = {&b.road, &b.ground, &b.extended_ground, &b.scene};
  for (const DepthMap* m : chain) require_same_shape(*m, b.surface, "nesting check");

  std::size_t violations = 0;
  for (int y = 0; y < b.surface.height(); ++y) {
    for (int x = 0; x < b.surface.width(); ++x) {
      bool bad = false;
      if (b.road.valid(x, y) &&
          (!b.surface.valid(x, y) ||
           std::bit_cast<std::uint32_t>(b.road.at(x, y)) !=
               std::bit_cast<std::uint32_t>(b.surface.at(x, y)))) {
        bad = true;
      }
      for (int i = 0; i < 3 && !bad; ++i) {
        const DepthMap& earlier = *chain[i];
        if (!earlier.valid(x, y)) continue;
        for (int j = i + 1; j < 4; ++j) {
          const DepthMap& later = *chain[j];
          if (!later.valid(x, y) || std::bit_cast<std::uint32_t>(later.at(x, y)) !=
                                        std::bit_cast<std::uint32_t>(earlier.at(x, y))) {
            bad = true;
            break;
          }
        }
      }
      violations += bad;
    }
  }
  return violations;
}

}  // namespace embodepth
