#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lorasim/cluster/controller.hpp"
#include "lorasim/cluster/layout.hpp"
#include "lorasim/metrics/bundle.hpp"
#include "lorasim/metrics/metrics.hpp"
#include "lorasim/radio/medium.hpp"
#include "lorasim/radio/params.hpp"
#include "lorasim/transport/reliable.hpp"

namespace lorasim::scenario {

struct NodeConfig {
  NodeId id = 0;
  double x = 0;
  double y = 0;
  double z = 0;
  /// Whether the node samples and sends its own metrics.
  bool reports_metrics = true;
};

enum class OffsetMode { kStaggered, kSynchronized, kExplicit };

struct FaultEvent {
  enum class Kind { kKillNode, kReviveNode, kKillService };
  Kind kind = Kind::kKillNode;
  SimTime at;
  NodeId node = 0;
  /// kKillService only: the service dies wherever it currently runs.
  std::string service;
};

struct ServiceEntry {
  cluster::ServiceSpec spec;
  cluster::Placement placement;
};

/// File names inside the output directory.
struct OutputPaths {
  std::string latency = "latency.csv";
  std::string transmissions = "transmissions.csv";
  std::string failover = "failover.csv";
  std::string timeseries = "timeseries.txt";
  std::string summary = "summary.json";
};

struct ScenarioConfig {
  std::string name = "custom";
  std::uint64_t seed = 1;
  Duration duration = std::chrono::hours(24);
  radio::RadioParams radio;
  radio::ChannelConfig channel;
  std::vector<NodeConfig> nodes;
  metrics::MetricsConfig metrics;
  OffsetMode offset_mode = OffsetMode::kStaggered;
  std::map<NodeId, Duration> explicit_offsets;
  /// Spike: latency above this multiple of the run's median.
  double spike_threshold = 1.5;
  transport::TransportConfig transport;
  cluster::ClusterConfig cluster;
  std::vector<ServiceEntry> services;
  std::vector<FaultEvent> faults;
  metrics::SyncConfig sync;
  OutputPaths outputs;

  /// Throws ValidationError for the first violated invariant.
  void validate() const;
  cluster::ServiceLayout layout() const;
  /// First-sample offset of every reporting node.
  std::map<NodeId, Duration> start_offsets() const;
  std::vector<NodeId> node_ids() const;
};

/// Five nodes spread over two floors, all within 20 m of each other.
std::vector<NodeConfig> default_nodes();
/// influxdb and grafana placed over the first four nodes of `nodes`.
std::vector<ServiceEntry> default_services(const std::vector<NodeConfig>& nodes);

/// Invariant violation; field() is a dotted key path such as "metrics.interval".
class ValidationError : public std::invalid_argument {
 public:
  ValidationError(std::string field, const std::string& message)
      : std::invalid_argument(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

/// Parse or validation failure. what() reads "<origin>:<line>:<column>: message"
/// when the position is known.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& origin, int line, int column, const std::string& message);
  explicit ConfigError(const std::string& message) : std::runtime_error(message) {}
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_ = 0;
  int column_ = 0;
};

/// Reads a YAML scenario. Keys absent from the file keep the values of `base`
/// (or of the preset named by a top-level `preset:` key, or the defaults).
ScenarioConfig parse_scenario(const std::string& path, const std::optional<ScenarioConfig>& base = std::nullopt);
ScenarioConfig parse_scenario_text(const std::string& text, const std::string& origin = "<string>",
                                   const std::optional<ScenarioConfig>& base = std::nullopt);

}  // namespace lorasim::scenario
