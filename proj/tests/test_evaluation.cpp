#include <random>

#include <gtest/gtest.h>

#include "embodepth/evaluation.hpp"
#include "embodepth/synthetic.hpp"

using namespace embodepth;

namespace {

DepthMap constant(int w, int h, float v) {
  DepthMap d(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) d.set(x, y, v);
  return d;
}

RegionResult make_result(std::string region, double base, std::size_t n) {
  RegionResult r;
  r.region = std::move(region);
  r.metrics = {base, base * 2, base * 3, base * 4, 0.9, 0.95, 1.0, n};
  r.distribution = {0.25, 0.5, n};
  return r;
}

}  // namespace

TEST(DateKey, Formats) {
  EXPECT_EQ(date_key("2011-09-26_drive_0001"), "2011-09-26");
  EXPECT_EQ(date_key("2011_09_26_drive_0001"), "2011-09-26");
  EXPECT_EQ(date_key("2011-09-26"), "2011-09-26");
  EXPECT_FALSE(date_key("frame_0001"));
  EXPECT_FALSE(date_key("2011-9-26"));
  EXPECT_FALSE(date_key(""));
}

TEST(Evaluation, StandardRegions) {
  EXPECT_EQ(standard_regions(nullptr, nullptr).size(), 1u);
  const auto s = synthetic::make_fixture("flat");
  const auto regions = standard_regions(&s.seg, &s.table);
  ASSERT_EQ(regions.size(), 4u);
  EXPECT_EQ(regions[0].name, "all");
  EXPECT_EQ(regions[1].name, "road");
  EXPECT_EQ(regions[3].name, "scene");
  EXPECT_EQ(regions[3].mask->count(), 640u * 192u - s.gt.sky_count());
}

TEST(Evaluation, FrameSkipsEmptyRegionsAndResizes) {
  const auto s = synthetic::make_fixture("flat");
  const auto f = evaluate_frame("a", s.gt, s.gt, standard_regions(&s.seg, &s.table));
  ASSERT_EQ(f.regions.size(), 4u);
  for (const auto& r : f.regions) {
    EXPECT_EQ(r.metrics.abs_rel, 0.0);
    EXPECT_EQ(r.distribution.pct_within_5, 1.0);
  }
  const auto small = evaluate_frame("b", constant(4, 3, 10.0f), constant(8, 6, 10.0f), {{"all", {}}});
  EXPECT_EQ(small.regions[0].metrics.n_pixels, 48u);
  Mask none(8, 6);
  const auto partial = evaluate_frame("c", constant(8, 6, 10.0f), constant(8, 6, 10.0f),
                                      {{"all", {}}, {"empty", none}});
  EXPECT_EQ(partial.regions.size(), 1u);
  EXPECT_THROW(evaluate_frame("d", constant(8, 6, 10.0f), DepthMap(8, 6), {{"all", {}}}), Error);
}

TEST(Evaluation, AggregateMeansMetricsAndPoolsPixels) {
  FrameResult a{"a", {make_result("all", 0.1, 100)}};
  FrameResult b{"b", {make_result("all", 0.3, 300)}};
  b.regions[0].distribution = {1.0, 1.0, 300};
  const auto agg = aggregate({a, b});
  ASSERT_EQ(agg.size(), 1u);
  EXPECT_NEAR(agg[0].metrics.abs_rel, 0.2, 1e-12);
  EXPECT_EQ(agg[0].metrics.n_pixels, 400u);
  EXPECT_NEAR(agg[0].distribution.pct_within_5, (25.0 + 300.0) / 400.0, 1e-12);
  EXPECT_NEAR(agg[0].distribution.pct_within_10, (50.0 + 300.0) / 400.0, 1e-12);
}

TEST(Evaluation, GroupByDate) {
  std::vector<FrameResult> frames;
  for (const char* n : {"2011-09-26_a", "2011_09_26_b", "2011-09-28_a", "misc"})
    frames.push_back({n, {make_result("all", 0.1, 10)}});
  const auto groups = aggregate_by_date(frames);
  ASSERT_EQ(groups.size(), 3u);
  EXPECT_EQ(groups.at("2011-09-26")[0].metrics.n_pixels, 20u);
  EXPECT_EQ(groups.at("undated")[0].metrics.n_pixels, 10u);
}

TEST(Report, JsonRowsAndCsvRoundTrip) {
  const RegionResult r = make_result("road", 0.125, 77);
  EXPECT_EQ(region_from_json(to_json(r)).metrics.rmse, r.metrics.rmse);
  nlohmann::json doc;
  doc["aggregate"] = nlohmann::json::array({to_json(make_result("all", 0.1, 5)), to_json(r)});
  auto rows = report_rows(doc, "run1");
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].name, "run1");
  doc["groups"] = {{"2011-09-28", nlohmann::json::array({to_json(r)})},
                   {"2011-09-26", nlohmann::json::array({to_json(r)})}};
  rows = report_rows(doc, "run1");
  ASSERT_EQ(rows.size(), 2u);
  sort_rows(rows);
  EXPECT_EQ(rows[0].name, "2011-09-26");

  std::mt19937 rng(12);
  std::uniform_real_distribution<double> u(0.0, 3.0);
  std::vector<ReportRow> many;
  for (int i = 0; i < 20; ++i) {
    RegionResult x = make_result(i % 2 ? "all" : "road", u(rng), rng() % 1000);
    x.metrics.rmse = u(rng) / 3.0;
    many.push_back({"row" + std::to_string(i), x});
  }
  const auto back = parse_report_csv(format_report_csv(many));
  ASSERT_EQ(back.size(), many.size());
  for (std::size_t i = 0; i < many.size(); ++i) {
    EXPECT_EQ(back[i].name, many[i].name);
    EXPECT_EQ(back[i].result.region, many[i].result.region);
    EXPECT_EQ(back[i].result.metrics.abs_rel, many[i].result.metrics.abs_rel);
    EXPECT_EQ(back[i].result.metrics.rmse, many[i].result.metrics.rmse);
    EXPECT_EQ(back[i].result.metrics.n_pixels, many[i].result.metrics.n_pixels);
  }
  EXPECT_THROW(parse_report_csv("bad,header\n"), Error);
  EXPECT_NE(format_report_table(many).find("row19"), std::string::npos);
}
