#include <Eigen/Geometry>
#include <benchmark/benchmark.h>

#include "embodepth/camera.hpp"
#include "embodepth/kitti.hpp"
#include "embodepth/language.hpp"
#include "embodepth/metrics.hpp"
#include "embodepth/scene_depth.hpp"
#include "embodepth/synthetic.hpp"
#include "embodepth/telea.hpp"

using namespace embodepth;

namespace {

const synthetic::SyntheticScene& kitti_scene() {
  static const auto scene = synthetic::gen_box_scene(
      kitti::reference_rig(), {{-3.0, 12.0, 1.8, 4.2, 1.5, 26, 1},
                               {2.5, 20.0, 2.5, 8.0, 3.2, 27, 2},
                               {0.8, 8.0, 0.6, 0.6, 1.8, 24, 3}});
  return scene;
}

void BM_SurfaceDepth(benchmark::State& state) {
  const auto& s = kitti_scene();
  for (auto _ : state) benchmark::DoNotOptimize(surface_depth(s.rig));
}
BENCHMARK(BM_SurfaceDepth)->Unit(benchmark::kMillisecond);

void BM_SurfaceDepthTilted(benchmark::State& state) {
  CameraRig rig = kitti_scene().rig;
  rig.extrinsics.rotation = Eigen::AngleAxisd(0.03, Eigen::Vector3d::UnitX()).toRotationMatrix();
  for (auto _ : state) benchmark::DoNotOptimize(surface_depth(rig));
}
BENCHMARK(BM_SurfaceDepthTilted)->Unit(benchmark::kMillisecond);

void BM_ExtendVertical(benchmark::State& state) {
  const auto& s = kitti_scene();
  const auto b = run_pipeline(s.rig, s.seg, s.table);
  for (auto _ : state) benchmark::DoNotOptimize(extend_vertical(b.ground, s.seg, s.table));
}
BENCHMARK(BM_ExtendVertical)->Unit(benchmark::kMillisecond);

void BM_Telea(benchmark::State& state) {
  const auto& s = kitti_scene();
  const auto b = run_pipeline(s.rig, s.seg, s.table);
  DepthMap holes = b.extended_ground;
  for (int y = 0; y < holes.height(); ++y)
    for (int x = 0; x < holes.width(); ++x)
      if (s.table.category(s.seg(x, y)) == Category::kSky) holes.set_sky(x, y);
  const int radius = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(inpaint_telea(holes, radius));
}
BENCHMARK(BM_Telea)->Arg(3)->Arg(5)->Arg(9)->Unit(benchmark::kMillisecond);

void BM_Pipeline(benchmark::State& state) {
  const auto& s = kitti_scene();
  for (auto _ : state) benchmark::DoNotOptimize(run_pipeline(s.rig, s.seg, s.table));
}
BENCHMARK(BM_Pipeline)->Unit(benchmark::kMillisecond);

void BM_DepthMetrics(benchmark::State& state) {
  const auto& s = kitti_scene();
  const auto b = run_pipeline(s.rig, s.seg, s.table);
  for (auto _ : state) {
    benchmark::DoNotOptimize(depth_metrics(b.scene, s.gt));
    benchmark::DoNotOptimize(error_distribution(b.scene, s.gt));
  }
}
BENCHMARK(BM_DepthMetrics)->Unit(benchmark::kMillisecond);

void BM_ObjectDepths(benchmark::State& state) {
  const auto& s = kitti_scene();
  const auto b = run_pipeline(s.rig, s.seg, s.table);
  for (auto _ : state) benchmark::DoNotOptimize(object_depths(b.scene, s.instances, s.seg, s.table));
}
BENCHMARK(BM_ObjectDepths)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
