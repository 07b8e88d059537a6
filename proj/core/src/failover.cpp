#include "lorasim/cluster/failover.hpp"

#include <stdexcept>

namespace lorasim::cluster {

std::optional<NodeId> first_alive_fallback(const std::string&, const Placement& placement, NodeId failed_host,
                                           const LivenessTable& view) {
  for (const auto candidate : placement.fallbacks) {
    if (candidate != failed_host && view.usable(candidate)) return candidate;
  }
  return std::nullopt;
}

FailoverPlan plan_failover(NodeId offline_node, const ServiceLayout& layout, const LivenessTable& view,
                           const std::map<std::string, NodeId>& hosts, const TargetPolicy& policy) {
  if (view.state(offline_node) != Liveness::kOffline)
    throw std::invalid_argument("node " + std::to_string(offline_node) + " is not offline in this view");
  FailoverPlan plan;
  for (const auto& [service, host] : hosts) {
    if (host != offline_node || !layout.contains(service)) continue;
    if (auto target = policy(service, layout.placement(service), offline_node, view)) {
      plan.moves.push_back(Move{service, *target});
    } else {
      plan.unplaceable.push_back(service);
    }
  }
  return plan;
}

}  // namespace lorasim::cluster
