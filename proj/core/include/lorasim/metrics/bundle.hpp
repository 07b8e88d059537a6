#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <functional>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "lorasim/sim/kernel.hpp"
#include "lorasim/transport/reliable.hpp"

namespace lorasim::metrics {

using Version = std::uint64_t;

/// Every node starts here.
inline constexpr Version kGenesisVersion = 0x9e3779b97f4a7c15ULL;
/// Base of a snapshot bundle: applies on top of any version.
inline constexpr Version kAnyVersion = 0;

std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes);

struct Bundle {
  /// Content hash of the blob.
  std::uint64_t id = 0;
  Version base_version = 0;
  Version new_version = 0;
  std::vector<std::uint8_t> blob;

  std::size_t size_bytes() const { return blob.size(); }
  bool snapshot() const { return base_version == kAnyVersion; }
  bool operator==(const Bundle&) const = default;
};

/// Version reached by applying `blob` to `base`.
Version derive_version(Version base, std::span<const std::uint8_t> blob);

/// Deterministic synthetic blob of `payload_size` bytes; `to` is the version
/// it produces. Throws std::invalid_argument when from == to.
Bundle make_bundle(NodeId node, Version from, Version to, std::size_t payload_size);

/// Snapshot that brings any node to `to`.
Bundle make_snapshot(NodeId node, Version to, std::size_t payload_size);

/// "GB1" + base(8) + new(8) + id(8) + blob, big-endian.
std::vector<std::uint8_t> encode_bundle(const Bundle& b);
/// Throws std::invalid_argument on malformed input or a blob/id mismatch.
Bundle decode_bundle(std::span<const std::uint8_t> bytes);

enum class ApplyResult { kApplied, kAlreadyApplied, kRejected };
const char* to_string(ApplyResult r);

class NodeFileState {
 public:
  explicit NodeFileState(NodeId node, Version current = kGenesisVersion) : node_(node), current_(current) {}

  ApplyResult apply(const Bundle& b);
  NodeId node() const { return node_; }
  Version current_version() const { return current_; }

 private:
  NodeId node_;
  Version current_;
};

struct SyncConfig {
  bool enabled = false;
  NodeId publisher = 0;
  Duration interval = std::chrono::hours(1);
  std::size_t bundle_bytes = 2048;
  /// Snapshot size sent in reply to a resync request.
  std::size_t snapshot_bytes = 4096;
  /// A bundle transfer starts only while the node's committed airtime plus
  /// the bundle's stays under this share of the duty-cycle budget.
  double airtime_share = 0.75;
  Duration pacing_retry = std::chrono::minutes(1);
  /// No new versions are published after this instant.
  SimTime last_publish = SimTime::max();
};

struct SyncStats {
  std::uint64_t published = 0;
  std::uint64_t bundles_sent = 0;
  std::uint64_t applied = 0;
  std::uint64_t already_applied = 0;
  std::uint64_t rejected = 0;
  std::uint64_t resync_requests = 0;
  std::uint64_t snapshots_sent = 0;
  std::uint64_t failed_transfers = 0;
  std::uint64_t paced = 0;
  std::uint64_t superseded = 0;
};

/// File sync over the reliable transport. The publisher commits a new bundle
/// every interval and unicasts it to each peer, one transfer at a time and
/// paced so bulk data never eats the airtime heartbeats and ACKs need. A peer
/// whose base does not match asks for a snapshot with a DATA "RESYNC" message.
class SyncAgent {
 public:
  SyncAgent(NodeId self, std::vector<NodeId> nodes, SyncConfig config, sim::Kernel& kernel,
            transport::ReliableTransport& transport);
  ~SyncAgent();
  SyncAgent(const SyncAgent&) = delete;
  SyncAgent& operator=(const SyncAgent&) = delete;

  void start();
  void stop();
  /// Commits a new version locally and sends it to every peer.
  void publish();

  void on_delivery(const transport::Delivery& d);
  void on_outcome(const transport::TransferOutcome& o);

  const NodeFileState& state() const { return state_; }
  const SyncStats& stats() const { return stats_; }
  std::size_t queued() const { return queue_.size(); }
  bool is_publisher() const { return self_ == config_.publisher; }

 private:
  void send_to(NodeId peer, const Bundle& b);
  void pump();
  void schedule_publish();

  NodeId self_;
  std::vector<NodeId> nodes_;
  SyncConfig config_;
  sim::Kernel& kernel_;
  transport::ReliableTransport& transport_;
  NodeFileState state_;
  bool active_ = false;
  std::uint64_t generation_ = 0;
  std::deque<std::pair<NodeId, Bundle>> queue_;
  std::optional<std::uint64_t> in_flight_;
  sim::EventHandle timer_;
  sim::EventHandle pacing_timer_;
  SyncStats stats_;
};

}  // namespace lorasim::metrics
