#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lorasim/sim/kernel.hpp"
#include "lorasim/time.hpp"

namespace lorasim::scenario {

/// Linear-interpolation quantile (R type 7) of an ascending sample. Throws
/// std::invalid_argument on an empty sample or q outside [0, 1].
double quantile_sorted(const std::vector<double>& sorted, double q);

struct LatencyStats {
  std::size_t count = 0;
  double median_s = 0;
  double p95_s = 0;
  double max_s = 0;
  double mean_s = 0;
  /// Samples above threshold_s.
  std::size_t spikes = 0;
  double threshold_s = 0;
};

/// Spikes are counted against `spike_threshold_s` when given, otherwise
/// against factor x the sample's own median.
LatencyStats latency_stats(std::vector<double> latencies_s, double spike_factor, double spike_threshold_s = -1);

struct FailoverRow {
  Duration detect{0};
  Duration start{0};
  Duration total{0};
  std::string service;
  NodeId from = 0;
  NodeId to = 0;
  double image_size_mb = 0;
  SimTime failed_at;
  SimTime detected_at;
  SimTime completed_at;
  /// The previous host still ran the service when the takeover was decided.
  bool spurious = false;
};

struct NodeSummary {
  NodeId node = 0;
  LatencyStats latency;
  std::uint64_t sampled = 0;
  std::uint64_t ingested = 0;
};

struct RunSummary {
  std::string scenario;
  std::uint64_t seed = 0;
  Duration duration{0};
  std::size_t node_count = 0;
  double spike_factor = 1.5;

  LatencyStats latency;
  std::vector<NodeSummary> per_node;

  std::uint64_t sampled = 0;
  std::uint64_t ingested = 0;
  std::uint64_t lost = 0;
  std::uint64_t in_flight = 0;
  double delivery_ratio = 0;

  std::uint64_t transmissions = 0;
  std::uint64_t collisions = 0;
  std::uint64_t retransmissions = 0;
  std::uint64_t frames_sent = 0;
  std::uint64_t transfers_failed = 0;
  /// Highest airtime any node used within one sliding duty-cycle window.
  double duty_cycle_peak_s = 0;
  double duty_cycle_budget_s = 0;

  std::vector<FailoverRow> failovers;
  std::uint64_t unplaceable_events = 0;
  /// Instants (as intervals) where a service ran on two nodes at once.
  std::uint64_t ownership_overlaps = 0;
  Duration ownership_overlap_time{0};
  std::vector<std::string> unplaced_at_end;

  bool sync_enabled = false;
  bool sync_converged = true;
  std::uint64_t sync_published = 0;
  std::uint64_t sync_rejected = 0;
};

std::string summary_to_json(const RunSummary& s);
/// Reads what summary_to_json wrote (failover rows excluded). Throws
/// std::invalid_argument on malformed input.
RunSummary summary_from_json(const std::string& text);

struct CompareReport {
  double median_delta_s = 0;
  double p95_delta_s = 0;
  double delivery_ratio_delta = 0;
  std::int64_t collisions_delta = 0;
};

/// Signed deltas b - a. Throws std::invalid_argument when durations or node
/// counts differ.
CompareReport compare_runs(const RunSummary& a, const RunSummary& b);
std::string format_compare(const RunSummary& a, const RunSummary& b, const CompareReport& r);
/// Short human-readable block printed after a run.
std::string format_summary(const RunSummary& s);

}  // namespace lorasim::scenario
