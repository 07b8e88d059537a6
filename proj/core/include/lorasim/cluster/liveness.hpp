#pragma once

#include <map>
#include <vector>

#include "lorasim/sim/kernel.hpp"

namespace lorasim::cluster {

enum class Liveness { kAlive, kSuspect, kOffline };

const char* to_string(Liveness l);

/// One observer's view of its peers. A peer goes offline once
/// now - last_heartbeat > offline_timeout, and any heartbeat resets it to alive.
class LivenessTable {
 public:
  LivenessTable(NodeId self, const std::vector<NodeId>& nodes, SimTime boot, Duration suspect_timeout,
                Duration offline_timeout);

  void heartbeat(NodeId from, SimTime t);

  /// Advances states to time t; returns peers that became offline in this
  /// call (each offline transition is reported once).
  std::vector<NodeId> check(SimTime t);

  Liveness state(NodeId node) const;
  /// Alive or suspect. The observer always considers itself alive.
  bool usable(NodeId node) const { return node == self_ || state(node) != Liveness::kOffline; }
  SimTime last_heartbeat(NodeId node) const { return peers_.at(node).last_heartbeat; }
  NodeId self() const { return self_; }
  Duration offline_timeout() const { return offline_timeout_; }
  std::vector<NodeId> peers() const;

  /// Test hook: place a peer in an explicit state.
  void force(NodeId node, Liveness state, SimTime last_heartbeat);

 private:
  struct Entry {
    SimTime last_heartbeat;
    Liveness state = Liveness::kAlive;
  };
  NodeId self_;
  Duration suspect_timeout_;
  Duration offline_timeout_;
  std::map<NodeId, Entry> peers_;
};

}  // namespace lorasim::cluster
