#include "commands.hpp"

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "embodepth/evaluation.hpp"
#include "embodepth/image_io.hpp"
#include "embodepth/synthetic.hpp"
#include "embodepth/version.hpp"

namespace fs = std::filesystem;

namespace embodepth::cli {

namespace {

struct FrameFile {
  std::string stem;
  std::string path;
};

// Files in dir with one of the extensions, keyed by stem. When a stem has
// several, the earlier extension in the list wins.
std::map<std::string, std::string> list_by_stem(const std::string& dir,
                                                const std::vector<std::string>& extensions) {
  std::map<std::string, std::string> out;
  std::map<std::string, std::size_t> rank;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const auto ext = entry.path().extension().string();
    const auto it = std::find(extensions.begin(), extensions.end(), ext);
    if (it == extensions.end()) continue;
    const auto stem = entry.path().stem().string();
    const auto r = static_cast<std::size_t>(it - extensions.begin());
    if (!rank.contains(stem) || r < rank[stem]) {
      rank[stem] = r;
      out[stem] = entry.path().string();
    }
  }
  return out;
}

unsigned worker_count(unsigned requested, std::size_t tasks) {
  unsigned n = requested != 0 ? requested : std::max(1u, std::thread::hardware_concurrency());
  return static_cast<unsigned>(std::min<std::size_t>(n, std::max<std::size_t>(tasks, 1)));
}

struct FrameStatus {
  std::string name;
  bool ok = false;
  bool skipped = false;
  std::string error;
};

// Runs task(i) for every frame on a small pool. With strict, the first
// failure stops frames that have not started yet.
void run_frames(std::vector<FrameStatus>& status, unsigned jobs, bool strict,
                const std::function<void(std::size_t)>& task) {
  std::atomic<std::size_t> next{0};
  std::atomic<bool> abort{false};
  auto worker = [&] {
    for (std::size_t i = next++; i < status.size(); i = next++) {
      if (abort) {
        status[i].skipped = true;
        status[i].error = "skipped after an earlier failure (--strict)";
        continue;
      }
      try {
        task(i);
        status[i].ok = true;
      } catch (const std::exception& e) {
        status[i].error = e.what();
        if (strict) abort = true;
      }
    }
  };
  const unsigned n = worker_count(jobs, status.size());
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
}

std::size_t report_failures(const std::vector<FrameStatus>& status, std::ostream& err) {
  std::size_t failed = 0;
  for (const auto& s : status) {
    if (s.ok) continue;
    ++failed;
    err << fmt::format("frame {}: {}\n", s.name, s.error);
  }
  return failed;
}

void write_text_file(const std::string& path, const std::string& text) {
  write_binary_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

std::string read_text(const std::string& path) {
  const auto bytes = read_binary_file(path);
  return {bytes.begin(), bytes.end()};
}

void write_labels_png(const std::string& path, const Grid<std::uint16_t>& labels) {
  const auto max = labels.empty() ? 0 : *std::max_element(labels.data().begin(), labels.data().end());
  write_png_gray(path, labels, max > 255 ? 16 : 8);
}

nlohmann::json failures_json(const std::vector<FrameStatus>& status) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& s : status) {
    if (!s.ok) out.push_back({{"name", s.name}, {"error", s.error}});
  }
  return out;
}

}  // namespace

std::string stage_path(const std::string& output_dir, Stage stage, const std::string& stem) {
  return (fs::path(output_dir) / std::string(to_string(stage)) / stem).string();
}

int cmd_compute(const RunConfig& c, const Globals& g, std::ostream& out, std::ostream& err) {
  require_path(c.seg_dir, "seg_dir");
  require_field(c.output_dir, "output_dir");
  const ClassTable table = load_table(c);
  const CameraRig base = load_rig(c);
  const auto inputs = list_by_stem(c.seg_dir, {".png"});
  if (inputs.empty()) {
    throw Error(ErrorCode::kIo, fmt::format("no .png label maps in '{}'", c.seg_dir));
  }

  std::vector<FrameFile> frames;
  for (const auto& [stem, path] : inputs) frames.push_back({stem, path});
  std::vector<FrameStatus> status(frames.size());
  std::vector<std::array<std::size_t, 5>> valid(frames.size());
  std::vector<std::size_t> sky(frames.size());
  for (std::size_t i = 0; i < frames.size(); ++i) status[i].name = frames[i].stem;

  const PipelineOptions options{c.inpaint_radius};
  run_frames(status, g.jobs, g.strict, [&](std::size_t i) {
    const SegmentationMap seg = load_labels_file(frames[i].path, table);
    const CameraRig rig = with_image_size(base, seg.width(), seg.height());
    const EmbodiedDepthBundle bundle = run_pipeline(rig, seg, table, options);
    for (std::size_t s = 0; s < kAllStages.size(); ++s) {
      valid[i][s] = bundle.stage(kAllStages[s]).valid_count();
    }
    sky[i] = bundle.scene.sky_count();
    for (Stage stage : c.stages) {
      const std::string base_path = stage_path(c.output_dir, stage, frames[i].stem);
      if (c.format != OutputFormat::kF32) write_depth_png16(base_path + ".png", bundle.stage(stage));
      if (c.format != OutputFormat::kPng16) write_depth_f32(base_path + ".f32", bundle.stage(stage));
    }
  });

  nlohmann::json frame_docs = nlohmann::json::array();
  for (std::size_t i = 0; i < frames.size(); ++i) {
    nlohmann::json f = {{"name", frames[i].stem}, {"input", frames[i].path}};
    if (status[i].ok) {
      f["status"] = "ok";
      nlohmann::json counts;
      for (std::size_t s = 0; s < kAllStages.size(); ++s) {
        counts[std::string(to_string(kAllStages[s]))] = valid[i][s];
      }
      f["valid_pixels"] = counts;
      f["sky_pixels"] = sky[i];
    } else {
      f["status"] = status[i].skipped ? "skipped" : "error";
      f["error"] = status[i].error;
    }
    frame_docs.push_back(std::move(f));
  }
  const std::size_t failed = report_failures(status, err);
  const nlohmann::json manifest = {{"command", "compute"},
                                   {"version", kVersion},
                                   {"config", to_json(c)},
                                   {"strict", g.strict},
                                   {"frames", frame_docs},
                                   {"failed", failed}};
  write_text_file((fs::path(c.output_dir) / "manifest.json").string(), manifest.dump(2) + "\n");
  out << fmt::format("compute: {} frame(s), {} failed\n", frames.size(), failed);
  return failed == 0 ? 0 : 1;
}

int cmd_evaluate(const RunConfig& c, const Globals& g, std::ostream& out, std::ostream& err) {
  require_path(c.pred_dir, "pred_dir");
  require_path(c.gt_dir, "gt_dir");
  const bool regions = !c.seg_dir.empty();
  if (regions) require_path(c.seg_dir, "seg_dir");
  const ClassTable table = load_table(c);

  const auto preds = list_by_stem(c.pred_dir, {".f32", ".png"});
  const auto gts = list_by_stem(c.gt_dir, {".f32", ".png"});
  std::vector<FrameFile> pairs;
  nlohmann::json unmatched_pred = nlohmann::json::array();
  nlohmann::json unmatched_gt = nlohmann::json::array();
  for (const auto& [stem, path] : preds) {
    if (gts.contains(stem)) pairs.push_back({stem, path});
    else unmatched_pred.push_back(stem);
  }
  for (const auto& [stem, path] : gts) {
    if (!preds.contains(stem)) unmatched_gt.push_back(stem);
  }
  if (pairs.empty()) {
    throw Error(ErrorCode::kEmptyEvaluation,
                fmt::format("no prediction/ground-truth pairs share a file stem in '{}' and '{}'",
                            c.pred_dir, c.gt_dir));
  }

  std::vector<FrameStatus> status(pairs.size());
  std::vector<FrameResult> results(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) status[i].name = pairs[i].stem;
  EvaluationOptions options;
  options.range.min_depth = c.min_depth;
  options.range.max_depth = c.max_depth;
  options.median_scaling = c.median_scaling;

  run_frames(status, g.jobs, g.strict, [&](std::size_t i) {
    const DepthMap pred = read_depth_file(pairs[i].path);
    const DepthMap gt = read_depth_file(gts.at(pairs[i].stem));
    EvaluationOptions frame_options = options;
    if (c.garg_crop) frame_options.range.crop = garg_crop(gt.width(), gt.height());
    std::vector<NamedMask> masks;
    if (regions) {
      const SegmentationMap seg =
          load_labels_file((fs::path(c.seg_dir) / (pairs[i].stem + ".png")).string(), table);
      require_same_shape(seg, gt, "seg vs gt");
      masks = standard_regions(&seg, &table);
    } else {
      masks = standard_regions(nullptr, nullptr);
    }
    results[i] = evaluate_frame(pairs[i].stem, pred, gt, masks, frame_options);
  });

  std::vector<FrameResult> ok;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (status[i].ok) ok.push_back(results[i]);
  }
  const std::size_t failed = report_failures(status, err);
  if (ok.empty()) {
    throw Error(ErrorCode::kEmptyEvaluation, "no frame could be evaluated");
  }

  auto regions_json = [](const std::vector<RegionResult>& rs) {
    nlohmann::json a = nlohmann::json::array();
    for (const auto& r : rs) a.push_back(to_json(r));
    return a;
  };
  nlohmann::json frames = nlohmann::json::array();
  for (const auto& f : ok) frames.push_back({{"name", f.name}, {"regions", regions_json(f.regions)}});
  nlohmann::json doc = {{"command", "evaluate"},
                        {"version", kVersion},
                        {"config", to_json(c)},
                        {"frames", frames},
                        {"aggregate", regions_json(aggregate(ok))},
                        {"unmatched", {{"pred", unmatched_pred}, {"gt", unmatched_gt}}},
                        {"failed", failures_json(status)}};
  if (c.group_by_date) {
    nlohmann::json groups = nlohmann::json::object();
    for (const auto& [key, rs] : aggregate_by_date(ok)) groups[key] = regions_json(rs);
    doc["groups"] = groups;
  }
  const std::string text = doc.dump(2) + "\n";
  if (c.output.empty()) out << text;
  else write_text_file(c.output, text);
  return failed == 0 ? 0 : 1;
}

int cmd_describe(const RunConfig& c, std::ostream& out, std::ostream&) {
  if (c.instances.empty()) {
    throw Error(ErrorCode::kConfig,
                "describe needs an instance map (--instances); class-only descriptions are not "
                "supported");
  }
  require_path(c.scene, "scene");
  require_path(c.instances, "instances");
  require_path(c.seg, "seg");
  const ClassTable table = load_table(c);
  std::vector<std::string> captions;
  if (!c.captions.empty()) {
    require_path(c.captions, "captions");
    captions = parse_captions(read_text(c.captions));
  }
  const DepthMap scene = read_depth_file(c.scene);
  const SegmentationMap seg = load_labels_file(c.seg, table);
  const InstanceMap instances = load_instances_file(c.instances, seg);
  require_same_shape(scene, seg, "scene vs seg");
  const ObjectDepthOptions options{c.min_pixels, c.aggregation};
  const CombinedText combined =
      combine_text(captions, object_depths(scene, instances, seg, table, options));
  const std::string text = combined.serialize();
  const std::string text_file = text.empty() ? std::string() : text + "\n";
  const std::string json_file = combined.to_json().dump(2) + "\n";
  if (c.output.empty()) {
    out << text_file << json_file;
  } else {
    write_text_file(c.output + ".txt", text_file);
    write_text_file(c.output + ".json", json_file);
  }
  return 0;
}

int cmd_synth(const RunConfig& c, const std::vector<std::string>& names, std::ostream& out,
              std::ostream&) {
  require_field(c.output_dir, "output_dir");
  const std::vector<std::string> wanted = names.empty() ? synthetic::fixture_names() : names;
  const DepthMode mode = c.depth_mode.value_or(DepthMode::kEuclidean);
  for (const auto& name : wanted) {
    const synthetic::SyntheticScene scene = synthetic::make_fixture(name, mode);
    const fs::path dir = fs::path(c.output_dir) / name;
    write_text_file((dir / "camera.cfg").string(), format_camera_config(scene.rig));
    write_text_file((dir / "classes.txt").string(), scene.table.format());
    write_labels_png((dir / "seg" / (name + ".png")).string(), scene.seg.labels());
    write_png_gray((dir / "instances" / (name + ".png")).string(), scene.instances.ids(), 16);
    write_depth_png16((dir / "gt" / (name + ".png")).string(), scene.gt);
    write_depth_f32((dir / "gt" / (name + ".f32")).string(), scene.gt);
    write_text_file((dir / "manifest.json").string(),
                    synthetic::fixture_manifest(scene).dump(2) + "\n");
    out << fmt::format("synth: wrote {}\n", dir.string());
  }
  return 0;
}

int cmd_report(const std::vector<std::string>& inputs, const std::string& region,
               const std::string& csv_path, std::ostream& out, std::ostream&) {
  if (inputs.empty()) throw Error(ErrorCode::kConfig, "report needs at least one evaluation JSON");
  std::vector<ReportRow> rows;
  for (const auto& path : inputs) {
    require_path(path, "report input");
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(read_text(path));
      for (auto& row : report_rows(doc, fs::path(path).stem().string())) {
        if (region.empty() || row.result.region == region) rows.push_back(std::move(row));
      }
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kFormat, fmt::format("{}: malformed evaluation JSON: {}", path, e.what()));
    }
  }
  sort_rows(rows);
  out << format_report_table(rows);
  if (!csv_path.empty()) write_text_file(csv_path, format_report_csv(rows));
  return 0;
}

namespace {

// Flags override values from --config only when given on the command line.
class Overrides {
 public:
  template <typename T>
  CLI::Option* add(CLI::App* app, const std::string& flag, const std::string& help,
                   std::function<void(RunConfig&, const T&)> apply) {
    auto value = std::make_shared<T>();
    CLI::Option* opt = app->add_option(flag, *value, help);
    pending_.push_back([opt, value, apply](RunConfig& c) {
      if (opt->count() > 0) apply(c, *value);
    });
    return opt;
  }
  CLI::Option* flag(CLI::App* app, const std::string& name, const std::string& help,
                    bool RunConfig::*field) {
    auto value = std::make_shared<bool>(false);
    CLI::Option* opt = app->add_flag(name, *value, help);
    pending_.push_back([opt, field](RunConfig& c) {
      if (opt->count() > 0) c.*field = true;
    });
    return opt;
  }
  CLI::Option* path(CLI::App* app, const std::string& flag, const std::string& help,
                    std::string RunConfig::*field) {
    return add<std::string>(app, flag, help,
                            [field](RunConfig& c, const std::string& v) { c.*field = v; });
  }
  void apply(RunConfig& c) const {
    for (const auto& f : pending_) f(c);
  }

 private:
  std::vector<std::function<void(RunConfig&)>> pending_;
};

void add_common(Overrides& ov, CLI::App* cmd) {
  ov.path(cmd, "--camera", "camera config (or calib_cam_to_cam.txt with --dataset kitti)",
          &RunConfig::camera);
  ov.path(cmd, "--classes", "class table (default: built-in Cityscapes)", &RunConfig::classes);
  ov.add<std::string>(cmd, "--depth-mode", "euclidean or z_depth",
                      [](RunConfig& c, const std::string& v) { c.depth_mode = parse_depth_mode(v); });
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Embodied depth: ground-plane depth priors from camera geometry and labels",
               "embodepth"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  std::string config_path;
  Globals globals;
  Overrides ov;
  app.add_option("--config", config_path, "JSON run config or a previous run manifest");
  app.add_option("--jobs", globals.jobs, "worker threads (default: hardware threads)");
  app.add_flag("--strict", globals.strict, "stop at the first failing frame");
  ov.add<std::string>(&app, "--format", "png16, f32 or both",
                      [](RunConfig& c, const std::string& v) { c.format = parse_output_format(v); });

  auto* compute = app.add_subcommand("compute", "run the depth pipeline over a directory of label maps");
  compute->fallthrough();
  add_common(ov, compute);
  ov.path(compute, "--seg-dir", "directory of label PNGs", &RunConfig::seg_dir);
  ov.path(compute, "--output-dir", "output directory", &RunConfig::output_dir);
  ov.add<std::string>(compute, "--dataset", "dataset adapter (kitti)",
                      [](RunConfig& c, const std::string& v) { c.dataset = v; });
  ov.add<double>(compute, "--camera-height", "camera height for --dataset kitti (m)",
                 [](RunConfig& c, const double& v) { c.camera_height_m = v; });
  ov.add<int>(compute, "--inpaint-radius", "Telea neighbourhood radius (px)",
              [](RunConfig& c, const int& v) { c.inpaint_radius = v; });
  ov.add<std::vector<std::string>>(compute, "--stages", "stages to write (default: all)",
                                   [](RunConfig& c, const std::vector<std::string>& v) {
                                     c.stages.clear();
                                     for (const auto& s : v) c.stages.push_back(parse_stage(s));
                                   });

  auto* evaluate = app.add_subcommand("evaluate", "compare predicted depth with ground truth");
  evaluate->fallthrough();
  ov.path(evaluate, "--classes", "class table (default: built-in Cityscapes)", &RunConfig::classes);
  ov.path(evaluate, "--pred-dir", "predicted depth files", &RunConfig::pred_dir);
  ov.path(evaluate, "--gt-dir", "ground-truth depth files", &RunConfig::gt_dir);
  ov.path(evaluate, "--seg-dir", "label maps for road/ground/scene breakdown", &RunConfig::seg_dir);
  ov.path(evaluate, "--output,-o", "write the JSON here instead of stdout", &RunConfig::output);
  ov.add<double>(evaluate, "--min-depth", "lower depth bound (m)",
                 [](RunConfig& c, const double& v) { c.min_depth = v; });
  ov.add<double>(evaluate, "--max-depth", "upper depth bound (m)",
                 [](RunConfig& c, const double& v) { c.max_depth = v; });
  ov.flag(evaluate, "--garg-crop", "restrict to the Garg crop", &RunConfig::garg_crop);
  ov.flag(evaluate, "--median-scaling", "scale predictions by the median ratio",
          &RunConfig::median_scaling);
  ov.flag(evaluate, "--group-by-date", "aggregate per YYYY-MM-DD file prefix",
          &RunConfig::group_by_date);

  auto* describe = app.add_subcommand("describe", "render per-object depth sentences");
  describe->fallthrough();
  ov.path(describe, "--classes", "class table (default: built-in Cityscapes)", &RunConfig::classes);
  ov.path(describe, "--scene", "scene depth (.png or .f32)", &RunConfig::scene);
  ov.path(describe, "--instances", "instance-id PNG", &RunConfig::instances);
  ov.path(describe, "--seg", "label PNG", &RunConfig::seg);
  ov.path(describe, "--captions", "captions, one per line", &RunConfig::captions);
  ov.path(describe, "--output,-o", "write <path>.txt and <path>.json instead of stdout",
          &RunConfig::output);
  ov.add<std::size_t>(describe, "--min-pixels", "smallest instance to describe",
                      [](RunConfig& c, const std::size_t& v) { c.min_pixels = v; });
  ov.add<std::string>(describe, "--aggregation", "median or mean",
                      [](RunConfig& c, const std::string& v) {
                        if (v == "median") c.aggregation = DepthAggregation::kMedian;
                        else if (v == "mean") c.aggregation = DepthAggregation::kMean;
                        else throw Error(ErrorCode::kConfig, fmt::format("unknown aggregation '{}'", v));
                      });

  auto* synth = app.add_subcommand("synth", "write the synthetic fixtures");
  synth->fallthrough();
  std::vector<std::string> synth_names;
  synth->add_option("--name", synth_names, "fixture name (repeatable; default: all)");
  ov.path(synth, "--output-dir", "output directory", &RunConfig::output_dir);
  ov.add<std::string>(synth, "--depth-mode", "euclidean or z_depth",
                      [](RunConfig& c, const std::string& v) { c.depth_mode = parse_depth_mode(v); });

  auto* report = app.add_subcommand("report", "tabulate evaluation JSONs");
  report->fallthrough();
  std::vector<std::string> report_inputs;
  std::string report_region = "all";
  std::string report_csv;
  report->add_option("inputs", report_inputs, "evaluation JSON files")->required();
  report->add_option("--region", report_region, "region to tabulate (empty string: every region)");
  report->add_option("--csv", report_csv, "also write the table as CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    RunConfig config = config_path.empty() ? RunConfig{} : load_run_config(config_path);
    ov.apply(config);
    if (compute->parsed()) return cmd_compute(config, globals, out, err);
    if (evaluate->parsed()) return cmd_evaluate(config, globals, out, err);
    if (describe->parsed()) return cmd_describe(config, out, err);
    if (synth->parsed()) return cmd_synth(config, synth_names, out, err);
    return cmd_report(report_inputs, report_region, report_csv, out, err);
  } catch (const Error& e) {
    err << fmt::format("error [{}]: {}\n", to_string(e.code()), e.what());
    return e.code() == ErrorCode::kConfig ? 2 : 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace embodepth::cli
