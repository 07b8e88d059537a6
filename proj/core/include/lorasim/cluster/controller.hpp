#pragma once

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "lorasim/cluster/failover.hpp"
#include "lorasim/cluster/layout.hpp"
#include "lorasim/cluster/liveness.hpp"
#include "lorasim/sim/kernel.hpp"
#include "lorasim/sim/rng.hpp"

namespace lorasim::cluster {

struct ClusterConfig {
  Duration heartbeat_interval = std::chrono::seconds(30);
  Duration offline_timeout = std::chrono::seconds(90);
  Duration suspect_timeout = std::chrono::seconds(60);
  /// Relative uniform jitter applied to every heartbeat period (0.1 = +/-10%).
  double heartbeat_jitter = 0.1;
  Duration check_interval = std::chrono::seconds(1);
};

/// Heartbeat body: the sender and the services it currently runs.
struct HeartbeatPayload {
  NodeId node = 0;
  std::vector<std::string> services;

  bool operator==(const HeartbeatPayload&) const = default;
};

std::vector<std::uint8_t> encode_heartbeat(const HeartbeatPayload& hb);
/// Throws std::invalid_argument on malformed text.
HeartbeatPayload decode_heartbeat(std::span<const std::uint8_t> bytes);

/// A completed takeover as seen by the node that executed it.
struct Redeploy {
  std::string service;
  NodeId from = 0;
  NodeId to = 0;
  SimTime detected;
  SimTime completed;
  Duration start_time{0};
};

/// Per-node failover manager: emits heartbeats, tracks peer liveness and the
/// believed host of every service, and starts services it is responsible for.
/// A node takes over a service only when it is the first usable fallback in
/// its own view, so no agreement round is needed on the radio link. Before it
/// takes over from a host that timed out, it probes that host once more; lost
/// heartbeats alone never start a second instance.
class NodeController {
 public:
  struct Hooks {
    std::function<void(const HeartbeatPayload&)> send_heartbeat;
    std::function<void(const std::string& service)> service_started;
    std::function<void(const std::string& service)> service_stopped;
    std::function<void(const Redeploy&)> redeployed;
    std::function<void(const std::string& service)> unplaceable;
    /// Reliable reachability check of a peer; the callback receives true when
    /// the peer acknowledged. Without it takeovers commit on the timeout alone.
    std::function<void(NodeId peer, std::function<void(bool reachable)>)> probe;
  };

  NodeController(NodeId self, std::vector<NodeId> nodes, const ServiceLayout& layout, ClusterConfig config,
                 sim::Kernel& kernel, sim::RngRegistry& rng, Hooks hooks, TargetPolicy policy = first_alive_fallback);
  ~NodeController();
  NodeController(const NodeController&) = delete;
  NodeController& operator=(const NodeController&) = delete;

  /// Starts heartbeats and liveness checks. A fresh cluster (`initial`) starts
  /// each service on its primary; a rebooted node starts empty and learns
  /// placements from heartbeats.
  void boot(bool initial);
  /// Node death: cancels timers and in-progress starts and forgets all state.
  void stop();

  void emit_heartbeat();
  void on_heartbeat(const HeartbeatPayload& hb);
  /// Any other decoded frame from a peer also proves it is up.
  void on_activity(NodeId from);
  std::vector<NodeId> check_liveness();

  /// Begins a local start; completion fires after a draw from the start-time model.
  SimTime execute_redeploy(const std::string& service, NodeId from);
  /// Fault injection: the local container dies.
  bool kill_service(const std::string& service);

  std::optional<NodeId> believed_host(const std::string& service) const;
  const std::set<std::string>& running() const { return running_; }
  bool starting(const std::string& service) const { return starting_.contains(service); }
  bool probing(NodeId peer) const { return probing_.contains(peer); }
  const LivenessTable& liveness() const { return liveness_; }
  NodeId self() const { return self_; }

 private:
  sim::EventHandle schedule(SimTime at, std::function<void()> fn, const char* label);
  void schedule_heartbeat(Duration delay);
  void schedule_check();
  void reconcile_orphans();
  void take_over(const std::string& service, NodeId from);
  void confirm_and_take_over(const std::string& service, NodeId from);
  void stop_service(const std::string& service);

  NodeId self_;
  std::vector<NodeId> nodes_;
  const ServiceLayout& layout_;
  ClusterConfig config_;
  sim::Kernel& kernel_;
  sim::RngStream& jitter_rng_;
  sim::RngStream& start_rng_;
  Hooks hooks_;
  TargetPolicy policy_;

  bool active_ = false;
  SimTime boot_time_;
  LivenessTable liveness_;
  std::set<std::string> running_;
  std::map<std::string, sim::EventHandle> starting_;
  std::map<std::string, std::optional<NodeId>> hosts_;
  std::map<std::string, NodeId> vacated_by_;
  std::map<std::string, std::set<NodeId>> advertisers_;
  std::set<std::string> reported_unplaceable_;
  std::map<NodeId, std::set<std::string>> probing_;
  std::uint64_t epoch_ = 0;
  std::set<std::uint64_t> scheduled_;
};

}  // namespace lorasim::cluster
