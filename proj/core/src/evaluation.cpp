#include "embodepth/evaluation.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <sstream>

#include <fmt/format.h>

namespace embodepth {

std::vector<NamedMask> standard_regions(const SegmentationMap* seg, const ClassTable* table) {
  std::vector<NamedMask> regions;
  regions.push_back({"all", std::nullopt});
  if (seg == nullptr || table == nullptr) return regions;
  regions.push_back({"road", mask_for(*seg, *table, CategorySet::road())});
  regions.push_back({"ground", mask_for(*seg, *table, CategorySet::ground())});
  regions.push_back({"scene", mask_for(*seg, *table,
                                       {Category::kRoad, Category::kFlatGround,
                                        Category::kVertical, Category::kVoid})});
  return regions;
}

FrameResult evaluate_frame(std::string name, const DepthMap& pred, const DepthMap& gt,
                           const std::vector<NamedMask>& regions,
                           const EvaluationOptions& options) {
  const DepthMap resized = resize_bilinear_valid(pred, gt.width(), gt.height());
  FrameResult frame{std::move(name), {}};
  for (const auto& region : regions) {
    const Mask* mask = region.mask ? &*region.mask : nullptr;
    try {
      RegionResult r;
      r.region = region.name;
      r.metrics = depth_metrics(resized, gt, mask, options.range, options.median_scaling);
      r.distribution = error_distribution(resized, gt, mask, options.range);
      frame.regions.push_back(std::move(r));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kEmptyEvaluation) throw;
    }
  }
  if (frame.regions.empty()) {
    throw Error(ErrorCode::kEmptyEvaluation,
                fmt::format("frame {}: no evaluable pixels in any region", frame.name));
  }
  return frame;
}

std::vector<RegionResult> aggregate(const std::vector<FrameResult>& frames) {
  struct Acc {
    MetricsReport sum;
    std::size_t frames = 0;
    std::size_t within5 = 0;
    std::size_t within10 = 0;
    std::size_t pixels = 0;
  };
  std::vector<std::string> order;
  std::map<std::string, Acc> acc;
  for (const auto& f : frames) {
    for (const auto& r : f.regions) {
      if (!acc.contains(r.region)) order.push_back(r.region);
      Acc& a = acc[r.region];
      a.sum.abs_rel += r.metrics.abs_rel;
      a.sum.sq_rel += r.metrics.sq_rel;
      a.sum.rmse += r.metrics.rmse;
      a.sum.rmse_log += r.metrics.rmse_log;
      a.sum.delta1 += r.metrics.delta1;
      a.sum.delta2 += r.metrics.delta2;
      a.sum.delta3 += r.metrics.delta3;
      a.sum.n_pixels += r.metrics.n_pixels;
      ++a.frames;
      const auto n = r.distribution.n_pixels;
      a.within5 += static_cast<std::size_t>(std::llround(r.distribution.pct_within_5 * n));
      a.within10 += static_cast<std::size_t>(std::llround(r.distribution.pct_within_10 * n));
      a.pixels += n;
    }
  }
  std::vector<RegionResult> out;
  for (const auto& name : order) {
    const Acc& a = acc[name];
    const double k = static_cast<double>(a.frames);
    RegionResult r;
    r.region = name;
    r.metrics = {a.sum.abs_rel / k, a.sum.sq_rel / k, a.sum.rmse / k, a.sum.rmse_log / k,
                 a.sum.delta1 / k,  a.sum.delta2 / k, a.sum.delta3 / k, a.sum.n_pixels};
    const double p = static_cast<double>(a.pixels);
    r.distribution = {a.within5 / p, a.within10 / p, a.pixels};
    out.push_back(std::move(r));
  }
  return out;
}

std::optional<std::string> date_key(std::string_view stem) {
  if (stem.size() < 10) return std::nullopt;
  auto digits = [&](std::size_t from, std::size_t n) {
    for (std::size_t i = from; i < from + n; ++i) {
      if (!std::isdigit(static_cast<unsigned char>(stem[i]))) return false;
    }
    return true;
  };
  const char sep = stem[4];
  if ((sep != '-' && sep != '_') || stem[7] != sep) return std::nullopt;
  if (!digits(0, 4) || !digits(5, 2) || !digits(8, 2)) return std::nullopt;
  std::string key(stem.substr(0, 10));
  key[4] = key[7] = '-';
  return key;
}

std::map<std::string, std::vector<RegionResult>> aggregate_by_date(
    const std::vector<FrameResult>& frames) {
  std::map<std::string, std::vector<FrameResult>> grouped;
  for (const auto& f : frames) grouped[date_key(f.name).value_or("undated")].push_back(f);
  std::map<std::string, std::vector<RegionResult>> out;
  for (const auto& [key, members] : grouped) out[key] = aggregate(members);
  return out;
}

nlohmann::json to_json(const RegionResult& r) {
  return {{"region", r.region}, {"metrics", r.metrics}, {"distribution", r.distribution}};
}

RegionResult region_from_json(const nlohmann::json& j) {
  RegionResult r;
  j.at("region").get_to(r.region);
  j.at("metrics").get_to(r.metrics);
  j.at("distribution").get_to(r.distribution);
  return r;
}

std::vector<ReportRow> report_rows(const nlohmann::json& evaluation,
                                   const std::string& fallback_name) {
  std::vector<ReportRow> rows;
  auto add = [&rows](const std::string& name, const nlohmann::json& regions) {
    for (const auto& r : regions) rows.push_back({name, region_from_json(r)});
  };
  if (evaluation.contains("groups") && !evaluation.at("groups").empty()) {
    for (const auto& [name, regions] : evaluation.at("groups").items()) add(name, regions);
  } else {
    add(fallback_name, evaluation.at("aggregate"));
  }
  return rows;
}

void sort_rows(std::vector<ReportRow>& rows) {
  std::stable_sort(rows.begin(), rows.end(),
                   [](const ReportRow& a, const ReportRow& b) { return a.name < b.name; });
}

namespace {

constexpr std::string_view kCsvHeader =
    "name,region,n_pixels,pct_within_5,pct_within_10,abs_rel,sq_rel,rmse,rmse_log,delta1,delta2,"
    "delta3";

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.emplace_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

double to_double(const std::string& s, int line) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw Error(ErrorCode::kFormat, fmt::format("report CSV line {}: bad number '{}'", line, s));
  }
  return v;
}

}  // namespace

std::string format_report_csv(const std::vector<ReportRow>& rows) {
  std::string out(kCsvHeader);
  out += '\n';
  for (const auto& row : rows) {
    if (row.name.find(',') != std::string::npos || row.result.region.find(',') != std::string::npos) {
      throw Error(ErrorCode::kFormat, "report names must not contain commas");
    }
    const auto& m = row.result.metrics;
    const auto& d = row.result.distribution;
    out += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{}\n", row.name, row.result.region,
                       d.n_pixels, d.pct_within_5, d.pct_within_10, m.abs_rel, m.sq_rel, m.rmse,
                       m.rmse_log, m.delta1, m.delta2, m.delta3);
  }
  return out;
}

std::vector<ReportRow> parse_report_csv(std::string_view csv) {
  std::vector<ReportRow> rows;
  std::istringstream in{std::string(csv)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1) {
      if (line != kCsvHeader) throw Error(ErrorCode::kFormat, "report CSV: unexpected header");
      continue;
    }
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 12) {
      throw Error(ErrorCode::kFormat, fmt::format("report CSV line {}: expected 12 fields", line_no));
    }
    ReportRow row;
    row.name = f[0];
    row.result.region = f[1];
    const double n = to_double(f[2], line_no);
    row.result.distribution = {to_double(f[3], line_no), to_double(f[4], line_no),
                               static_cast<std::size_t>(n)};
    row.result.metrics = {to_double(f[5], line_no), to_double(f[6], line_no),
                          to_double(f[7], line_no), to_double(f[8], line_no),
                          to_double(f[9], line_no), to_double(f[10], line_no),
                          to_double(f[11], line_no), static_cast<std::size_t>(n)};
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string format_report_table(const std::vector<ReportRow>& rows) {
  std::size_t name_w = 4;
  std::size_t region_w = 6;
  for (const auto& r : rows) {
    name_w = std::max(name_w, r.name.size());
    region_w = std::max(region_w, r.result.region.size());
  }
  std::string out = fmt::format("{:<{}}  {:<{}}  {:>10}  {:>8}  {:>8}  {:>8}  {:>8}  {:>8}  {:>8}  "
                                "{:>7}  {:>7}  {:>7}\n",
                                "name", name_w, "region", region_w, "pixels", "+/-5%", "+/-10%",
                                "AbsRel", "SqRel", "RMSE", "RMSElog", "d1", "d2", "d3");
  for (const auto& r : rows) {
    const auto& m = r.result.metrics;
    const auto& d = r.result.distribution;
    out += fmt::format("{:<{}}  {:<{}}  {:>10}  {:>7.2f}%  {:>7.2f}%  {:>8.4f}  {:>8.4f}  {:>8.4f}  "
                       "{:>8.4f}  {:>7.4f}  {:>7.4f}  {:>7.4f}\n",
                       r.name, name_w, r.result.region, region_w, d.n_pixels,
                       100.0 * d.pct_within_5, 100.0 * d.pct_within_10, m.abs_rel, m.sq_rel,
                       m.rmse, m.rmse_log, m.delta1, m.delta2, m.delta3);
  }
  return out;
}

}  // namespace embodepth
