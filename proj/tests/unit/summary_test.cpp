#include <gtest/gtest.h>

#include "lorasim/scenario/summary.hpp"

namespace lorasim::scenario {
namespace {

// Reference values from numpy.quantile (linear interpolation).
TEST(Quantile, MatchesLinearInterpolation) {
  std::vector<double> v{3, 1, 4, 1, 5, 9, 2, 6};
  std::sort(v.begin(), v.end());
  EXPECT_DOUBLE_EQ(quantile_sorted(v, 0.5), 3.5);
  EXPECT_NEAR(quantile_sorted(v, 0.95), 7.95, 1e-12);
  EXPECT_DOUBLE_EQ(quantile_sorted(v, 0.25), 1.75);
  EXPECT_DOUBLE_EQ(quantile_sorted(v, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(quantile_sorted(v, 1.0), 9.0);
  EXPECT_THROW(quantile_sorted({}, 0.5), std::invalid_argument);
  EXPECT_THROW(quantile_sorted(v, 1.5), std::invalid_argument);
}

TEST(LatencyStats, SpikesAgainstMedianMultiple) {
  const auto s = latency_stats({0.5, 0.6, 0.7, 2.0, 0.55}, 1.5);
  EXPECT_EQ(s.count, 5u);
  EXPECT_DOUBLE_EQ(s.median_s, 0.6);
  EXPECT_NEAR(s.p95_s, 1.74, 1e-12);
  EXPECT_DOUBLE_EQ(s.max_s, 2.0);
  EXPECT_NEAR(s.threshold_s, 0.9, 1e-12);
  EXPECT_EQ(s.spikes, 1u);
}

TEST(LatencyStats, ExplicitThreshold) {
  const auto s = latency_stats({1, 2, 3, 4}, 1.5, 2.0);
  EXPECT_EQ(s.spikes, 2u);
  EXPECT_EQ(latency_stats({}, 1.5).count, 0u);
}

RunSummary sample_summary() {
  RunSummary s;
  s.scenario = "x";
  s.seed = 3;
  s.duration = std::chrono::hours(24);
  s.node_count = 5;
  s.latency = latency_stats({0.5, 0.6, 0.7}, 1.5);
  s.sampled = 100;
  s.ingested = 98;
  s.lost = 2;
  s.delivery_ratio = 0.98;
  s.collisions = 12;
  s.duty_cycle_peak_s = 14.5;
  s.duty_cycle_budget_s = 36;
  s.unplaced_at_end = {"db"};
  return s;
}

TEST(Compare, IdenticalRunsGiveZeroDeltas) {
  const auto s = sample_summary();
  const auto r = compare_runs(s, s);
  EXPECT_EQ(r.median_delta_s, 0.0);
  EXPECT_EQ(r.p95_delta_s, 0.0);
  EXPECT_EQ(r.delivery_ratio_delta, 0.0);
  EXPECT_EQ(r.collisions_delta, 0);
  EXPECT_FALSE(format_compare(s, s, r).empty());
}

TEST(Compare, DeltasAreBMinusA) {
  auto a = sample_summary();
  auto b = sample_summary();
  b.latency.median_s += 1.0;
  b.collisions = 2;
  const auto r = compare_runs(a, b);
  EXPECT_DOUBLE_EQ(r.median_delta_s, 1.0);
  EXPECT_EQ(r.collisions_delta, -10);
}

TEST(Compare, IncompatibleRunsThrow) {
  auto a = sample_summary();
  auto b = sample_summary();
  b.duration = std::chrono::hours(12);
  EXPECT_THROW(compare_runs(a, b), std::invalid_argument);
  b = sample_summary();
  b.node_count = 4;
  EXPECT_THROW(compare_runs(a, b), std::invalid_argument);
}

TEST(SummaryJson, RoundTrip) {
  const auto s = sample_summary();
  const auto back = summary_from_json(summary_to_json(s));
  EXPECT_EQ(back.scenario, s.scenario);
  EXPECT_EQ(back.seed, s.seed);
  EXPECT_EQ(back.duration, s.duration);
  EXPECT_EQ(back.node_count, s.node_count);
  EXPECT_DOUBLE_EQ(back.latency.median_s, s.latency.median_s);
  EXPECT_EQ(back.collisions, s.collisions);
  EXPECT_DOUBLE_EQ(back.delivery_ratio, s.delivery_ratio);
  EXPECT_EQ(back.unplaced_at_end, s.unplaced_at_end);
  EXPECT_THROW(summary_from_json("{"), std::invalid_argument);
  EXPECT_THROW(summary_from_json("{}"), std::invalid_argument);
}

}  // namespace
}  // namespace lorasim::scenario
