#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "embodepth/metrics.hpp"
#include "embodepth/segmentation.hpp"

namespace embodepth {

// Metrics for one region (e.g. "all", "road") of one frame or group.
struct RegionResult {
  std::string region;
  MetricsReport metrics;
  ErrorDistribution distribution;
};

struct FrameResult {
  std::string name;
  std::vector<RegionResult> regions;
};

struct NamedMask {
  std::string name;
  std::optional<Mask> mask;  // empty = whole frame
};

// Regions evaluated when a label map is available: all, road, ground, scene
// (every non-sky pixel).
std::vector<NamedMask> standard_regions(const SegmentationMap* seg, const ClassTable* table);

struct EvaluationOptions {
  EvalRange range;                 // applies to both metrics and distributions
  bool median_scaling = false;
};

// Regions with no evaluable pixels are omitted; throws kEmptyEvaluation when
// every region is empty. pred is resampled to gt resolution when they differ.
FrameResult evaluate_frame(std::string name, const DepthMap& pred, const DepthMap& gt,
                           const std::vector<NamedMask>& regions,
                           const EvaluationOptions& options = {});

// Metrics are averaged over frames; distributions are pooled over pixels.
std::vector<RegionResult> aggregate(const std::vector<FrameResult>& frames);

// "YYYY-MM-DD" or "YYYY_MM_DD" prefix of a file stem, if any, returned as YYYY-MM-DD.
std::optional<std::string> date_key(std::string_view stem);

// frames grouped by date_key; stems without a date go to "undated".
std::map<std::string, std::vector<RegionResult>> aggregate_by_date(
    const std::vector<FrameResult>& frames);

nlohmann::json to_json(const RegionResult& r);
RegionResult region_from_json(const nlohmann::json& j);

// One row of the summary table.
struct ReportRow {
  std::string name;
  RegionResult result;
};

// Rows from an evaluate-output document: one per group when grouped,
// otherwise the aggregate, each expanded per region. fallback_name labels
// ungrouped rows.
std::vector<ReportRow> report_rows(const nlohmann::json& evaluation, const std::string& fallback_name);

// Sorted by (name, region order as given).
void sort_rows(std::vector<ReportRow>& rows);

std::string format_report_csv(const std::vector<ReportRow>& rows);
std::vector<ReportRow> parse_report_csv(std::string_view csv);
std::string format_report_table(const std::vector<ReportRow>& rows);

}  // namespace embodepth
