#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lorasim/cluster/layout.hpp"
#include "lorasim/cluster/liveness.hpp"

namespace lorasim::cluster {

/// Picks the node that should take over `service` from `failed_host`.
using TargetPolicy = std::function<std::optional<NodeId>(const std::string& service, const Placement& placement,
                                                         NodeId failed_host, const LivenessTable& view)>;

/// First fallback that is not the failed host and not offline in the view.
std::optional<NodeId> first_alive_fallback(const std::string& service, const Placement& placement,
                                           NodeId failed_host, const LivenessTable& view);

struct Move {
  std::string service;
  NodeId target = 0;
  bool operator==(const Move&) const = default;
};

struct FailoverPlan {
  std::vector<Move> moves;
  std::vector<std::string> unplaceable;
};

/// Pure: relocates every service whose host (per `hosts`) is `offline_node`.
/// Throws std::invalid_argument if the view does not consider it offline.
FailoverPlan plan_failover(NodeId offline_node, const ServiceLayout& layout, const LivenessTable& view,
                           const std::map<std::string, NodeId>& hosts,
                           const TargetPolicy& policy = first_alive_fallback);

}  // namespace lorasim::cluster
