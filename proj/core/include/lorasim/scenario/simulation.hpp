#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "lorasim/cluster/controller.hpp"
#include "lorasim/metrics/bundle.hpp"
#include "lorasim/metrics/metrics.hpp"
#include "lorasim/radio/medium.hpp"
#include "lorasim/scenario/config.hpp"
#include "lorasim/scenario/summary.hpp"
#include "lorasim/sim/kernel.hpp"
#include "lorasim/sim/rng.hpp"
#include "lorasim/transport/reliable.hpp"

namespace lorasim::scenario {

struct TransmissionRow {
  NodeId sender = 0;
  SimTime start;
  SimTime end;
  std::size_t bytes = 0;
  std::vector<NodeId> delivered_to;
  bool collided = false;
};

/// A period during which one service ran on more than one node.
struct OwnershipOverlap {
  std::string service;
  SimTime begin;
  SimTime end;
};

struct RunResult {
  RunSummary summary;
  std::vector<metrics::LatencyRecord> latencies;
  std::vector<TransmissionRow> transmissions;
  std::vector<FailoverRow> failovers;
  std::vector<std::string> timeseries;
  std::vector<OwnershipOverlap> overlaps;
  std::map<NodeId, metrics::Version> file_versions;
};

/// One deterministic run of a scenario.
class Simulation {
 public:
  explicit Simulation(ScenarioConfig config);
  ~Simulation();
  Simulation(const Simulation&) = delete;
  Simulation& operator=(const Simulation&) = delete;

  RunResult run();

  const ScenarioConfig& config() const { return config_; }
  sim::Kernel& kernel() { return kernel_; }
  radio::Medium& medium() { return *medium_; }
  bool alive(NodeId node) const;
  /// Nodes currently running `service` (ground truth).
  std::vector<NodeId> hosts_of(const std::string& service) const;

  const transport::ReliableTransport& transport(NodeId node) const;
  const cluster::NodeController& controller(NodeId node) const;
  const metrics::MetricsAgent& metrics_agent(NodeId node) const;
  const metrics::SyncAgent& sync_agent(NodeId node) const;
  const metrics::PacketLedger& ledger() const { return ledger_; }

  void kill_node(NodeId node);
  void revive_node(NodeId node);
  void kill_service(const std::string& service);

 private:
  struct Node;

  Node& node(NodeId id);
  const Node& node(NodeId id) const;
  void on_receive(NodeId rx, const radio::TransmissionRecord& rec);
  void on_service_started(NodeId node, const std::string& service);
  void on_service_stopped(NodeId node, const std::string& service);
  void on_redeployed(const cluster::Redeploy& r);
  RunResult collect();

  ScenarioConfig config_;
  sim::Kernel kernel_;
  sim::RngRegistry rng_;
  cluster::ServiceLayout layout_;
  std::unique_ptr<radio::Medium> medium_;
  metrics::Ingestor ingestor_;
  metrics::PacketLedger ledger_;
  std::map<NodeId, Duration> offsets_;
  std::vector<std::unique_ptr<Node>> nodes_;

  std::map<std::string, std::map<NodeId, SimTime>> running_;
  std::map<std::string, SimTime> down_since_;
  std::map<std::string, SimTime> overlap_since_;
  std::vector<OwnershipOverlap> overlaps_;
  std::vector<FailoverRow> failovers_;
  std::uint64_t unplaceable_events_ = 0;
  std::uint64_t undecodable_frames_ = 0;
  bool ran_ = false;
};

std::string latency_csv(const RunResult& r);
std::string transmissions_csv(const RunResult& r);
std::string failover_csv(const RunResult& r);

/// Writes every output file into `dir` (created if missing).
void write_outputs(const RunResult& r, const OutputPaths& paths, const std::filesystem::path& dir);

/// Builds and runs one simulation.
RunResult run_scenario(ScenarioConfig config);

}  // namespace lorasim::scenario
