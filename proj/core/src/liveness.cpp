#include "lorasim/cluster/liveness.hpp"

#include <stdexcept>

namespace lorasim::cluster {

const char* to_string(Liveness l) {
  switch (l) {
    case Liveness::kAlive: return "alive";
    case Liveness::kSuspect: return "suspect";
    case Liveness::kOffline: return "offline";
  }
  return "?";
}

LivenessTable::LivenessTable(NodeId self, const std::vector<NodeId>& nodes, SimTime boot, Duration suspect_timeout,
                             Duration offline_timeout)
    : self_(self), suspect_timeout_(suspect_timeout), offline_timeout_(offline_timeout) {
  if (suspect_timeout > offline_timeout) throw std::invalid_argument("suspect timeout exceeds offline timeout");
  for (const auto n : nodes) {
    if (n != self) peers_[n] = Entry{boot, Liveness::kAlive};
  }
}

void LivenessTable::heartbeat(NodeId from, SimTime t) {
  auto it = peers_.find(from);
  if (it == peers_.end()) return;
  if (t >= it->second.last_heartbeat) it->second.last_heartbeat = t;
  it->second.state = Liveness::kAlive;
}

std::vector<NodeId> LivenessTable::check(SimTime t) {
  std::vector<NodeId> newly_offline;
  for (auto& [node, e] : peers_) {
    const Duration silent = t - e.last_heartbeat;
    if (silent > offline_timeout_) {
      if (e.state != Liveness::kOffline) {
        e.state = Liveness::kOffline;
        newly_offline.push_back(node);
      }
    } else if (silent > suspect_timeout_) {
      e.state = Liveness::kSuspect;
    }
  }
  return newly_offline;
}

Liveness LivenessTable::state(NodeId node) const {
  if (node == self_) return Liveness::kAlive;
  auto it = peers_.find(node);
  return it == peers_.end() ? Liveness::kOffline : it->second.state;
}

std::vector<NodeId> LivenessTable::peers() const {
  std::vector<NodeId> out;
  for (const auto& [n, _] : peers_) out.push_back(n);
  return out;
}

void LivenessTable::force(NodeId node, Liveness state, SimTime last_heartbeat) {
  peers_[node] = Entry{last_heartbeat, state};
}

}  // namespace lorasim::cluster
