#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "embodepth/camera.hpp"
#include "embodepth/depth_map.hpp"
#include "embodepth/segmentation.hpp"

namespace embodepth::synthetic {

// Axis-aligned box standing on the ground plane (bottom face at y_w = h).
struct BoxSpec {
  double center_x = 0.0;  // world x of the footprint centre (m)
  double center_z = 0.0;  // world z of the footprint centre (m)
  double width = 1.0;     // extent along x (m)
  double depth = 1.0;     // extent along z (m)
  double height = 1.0;    // extent along -y (m)
  LabelId label = 0;
  InstanceId instance_id = 0;
};

struct SyntheticScene {
  std::string name;
  CameraRig rig;
  ClassTable table;
  std::vector<BoxSpec> boxes;
  SegmentationMap seg;
  InstanceMap instances;
  DepthMap gt;  // exact ray-cast depth in rig.depth_mode; sky pixels flagged
};

// Cityscapes ids used by the generator.
inline constexpr LabelId kRoadLabel = 7;
inline constexpr LabelId kSidewalkLabel = 8;
inline constexpr LabelId kSkyLabel = 23;

enum class HitKind { kNone, kGround, kBox };

struct RayHit {
  HitKind kind = HitKind::kNone;
  double t = 0.0;         // ray parameter; equals camera-frame z of the hit
  double range = 0.0;     // in the rig's depth mode
  int box_index = -1;
};

// Ray parameter t of the ray through pixel (u, v), parametrised so that the
// camera-frame z of the point is t. Empty when there is no forward hit.
std::optional<double> intersect_ground_plane(const CameraRig& rig, double u, double v);
std::optional<double> intersect_box(const CameraRig& rig, const BoxSpec& box, double u, double v);

// Nearest forward hit among the ground plane and the boxes.
RayHit cast_ray(const CameraRig& rig, const std::vector<BoxSpec>& boxes, double u, double v);

// Converts a ray parameter to a range in the rig's depth mode.
double range_from_t(const CameraRig& rig, double u, double v, double t);

// Below-horizon pixels are ROAD in the central road_fraction of columns and
// sidewalk elsewhere; everything else is SKY.
SyntheticScene gen_flat_scene(const CameraRig& rig, double road_fraction);

SyntheticScene gen_box_scene(const CameraRig& rig, const std::vector<BoxSpec>& boxes,
                             double road_fraction = 0.5);

enum class MorphOp { kErode, kDilate };

// Erodes or dilates the ROAD/FLAT_GROUND region by k pixels (L1 ball).
// Eroded pixels take a VERTICAL label, dilated pixels a ground label, each
// picked among the nearby candidates with a seeded generator.
SegmentationMap perturb_mask(const SegmentationMap& seg, const ClassTable& table, int k,
                             MorphOp op, std::uint32_t seed);

// Rig shared by the shipped fixtures (640x192, horizon at row 80).
CameraRig fixture_rig(DepthMode mode = DepthMode::kEuclidean);

std::vector<std::string> fixture_names();
SyntheticScene make_fixture(std::string_view name, DepthMode mode = DepthMode::kEuclidean);

// Valid-pixel counts implied by the scene geometry. The extended count
// assumes every box is seen resting on visible ground, which holds for the
// "flat" and "urban-3-box" fixtures only.
struct StageCounts {
  std::size_t surface = 0;
  std::size_t road = 0;
  std::size_t ground = 0;
  std::size_t extended_ground = 0;
  std::size_t scene = 0;
};
StageCounts oracle_stage_counts(const SyntheticScene& scene);

// Expected-value manifest written next to fixture files.
nlohmann::json fixture_manifest(const SyntheticScene& scene);

}  // namespace embodepth::synthetic
