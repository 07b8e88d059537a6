#include "lorasim/cluster/controller.hpp"

#include <algorithm>
#include <memory>
#include <sstream>
#include <stdexcept>

namespace lorasim::cluster {

std::vector<std::uint8_t> encode_heartbeat(const HeartbeatPayload& hb) {
  std::string text = std::to_string(hb.node) + ";";
  for (std::size_t i = 0; i < hb.services.size(); ++i) {
    if (i) text += ',';
    text += hb.services[i];
  }
  return {text.begin(), text.end()};
}

HeartbeatPayload decode_heartbeat(std::span<const std::uint8_t> bytes) {
  const std::string text(bytes.begin(), bytes.end());
  const auto semi = text.find(';');
  if (semi == std::string::npos || semi == 0) throw std::invalid_argument("heartbeat without node field");
  HeartbeatPayload hb;
  int node = 0;
  try {
    std::size_t used = 0;
    node = std::stoi(text.substr(0, semi), &used);
    if (used != semi) throw std::invalid_argument("trailing characters");
  } catch (const std::exception&) {
    throw std::invalid_argument("heartbeat node field is not a number");
  }
  if (node < 0 || node > 254) throw std::invalid_argument("heartbeat node id out of range");
  hb.node = static_cast<NodeId>(node);
  std::stringstream rest(text.substr(semi + 1));
  std::string item;
  while (std::getline(rest, item, ',')) {
    if (!item.empty()) hb.services.push_back(item);
  }
  return hb;
}

NodeController::NodeController(NodeId self, std::vector<NodeId> nodes, const ServiceLayout& layout,
                               ClusterConfig config, sim::Kernel& kernel, sim::RngRegistry& rng, Hooks hooks,
                               TargetPolicy policy)
    : self_(self),
      nodes_(std::move(nodes)),
      layout_(layout),
      config_(config),
      kernel_(kernel),
      jitter_rng_(rng.register_stream(sim::streams::kJitter)),
      start_rng_(rng.register_stream(sim::streams::kStartTime)),
      hooks_(std::move(hooks)),
      policy_(std::move(policy)),
      boot_time_(kernel.now()),
      liveness_(self, nodes_, kernel.now(), config.suspect_timeout, config.offline_timeout) {}

NodeController::~NodeController() {
  for (const auto seq : scheduled_) kernel_.cancel(sim::EventHandle{seq});
}

sim::EventHandle NodeController::schedule(SimTime at, std::function<void()> fn, const char* label) {
  auto slot = std::make_shared<std::uint64_t>(0);
  auto handle = kernel_.schedule(
      at,
      [this, slot, fn = std::move(fn)] {
        scheduled_.erase(*slot);
        fn();
      },
      self_, label);
  *slot = handle.sequence;
  scheduled_.insert(handle.sequence);
  return handle;
}

void NodeController::boot(bool initial) {
  active_ = true;
  boot_time_ = kernel_.now();
  liveness_ = LivenessTable(self_, nodes_, boot_time_, config_.suspect_timeout, config_.offline_timeout);
  for (const auto& service : layout_.services()) {
    const auto& p = layout_.placement(service);
    if (initial) {
      hosts_[service] = p.primary;
      if (p.primary == self_) {
        running_.insert(service);
        if (hooks_.service_started) hooks_.service_started(service);
      }
    } else {
      hosts_[service] = std::nullopt;
    }
    advertisers_[service].clear();
  }
  const auto first = Duration(static_cast<std::int64_t>(jitter_rng_.uniform() *
                                                        static_cast<double>(config_.heartbeat_interval.count())));
  schedule_heartbeat(first);
  schedule_check();
}

void NodeController::stop() {
  active_ = false;
  ++epoch_;
  probing_.clear();
  for (const auto seq : scheduled_) kernel_.cancel(sim::EventHandle{seq});
  scheduled_.clear();
  starting_.clear();
  while (!running_.empty()) stop_service(*running_.begin());
  hosts_.clear();
  vacated_by_.clear();
  advertisers_.clear();
  reported_unplaceable_.clear();
}

void NodeController::schedule_heartbeat(Duration delay) {
  schedule(kernel_.now() + delay, [this] {
    emit_heartbeat();
    const double factor = 1.0 + config_.heartbeat_jitter * (2.0 * jitter_rng_.uniform() - 1.0);
    schedule_heartbeat(Duration(static_cast<std::int64_t>(static_cast<double>(config_.heartbeat_interval.count()) * factor)));
  }, "heartbeat");
}

void NodeController::schedule_check() {
  schedule(kernel_.now() + config_.check_interval, [this] {
    check_liveness();
    schedule_check();
  }, "liveness-check");
}

void NodeController::emit_heartbeat() {
  if (!active_) return;
  HeartbeatPayload hb{self_, {running_.begin(), running_.end()}};
  if (hooks_.send_heartbeat) hooks_.send_heartbeat(hb);
}

void NodeController::stop_service(const std::string& service) {
  if (running_.erase(service) && hooks_.service_stopped) hooks_.service_stopped(service);
}

void NodeController::on_heartbeat(const HeartbeatPayload& hb) {
  if (!active_ || hb.node == self_) return;
  liveness_.heartbeat(hb.node, kernel_.now());

  const std::set<std::string> listed(hb.services.begin(), hb.services.end());
  for (const auto& service : listed) {
    if (!layout_.contains(service)) continue;
    advertisers_[service].insert(hb.node);
    if (running_.contains(service)) {
      // Two owners: the one ranked earlier in the desired layout keeps it.
      if (layout_.rank(service, hb.node) < layout_.rank(service, self_)) {
        stop_service(service);
        hosts_[service] = hb.node;
      }
      continue;
    }
    if (auto it = starting_.find(service); it != starting_.end()) {
      kernel_.cancel(it->second);
      scheduled_.erase(it->second.sequence);
      starting_.erase(it);
    }
    hosts_[service] = hb.node;
    vacated_by_.erase(service);
    reported_unplaceable_.erase(service);
  }
  for (auto& [service, who] : advertisers_) {
    if (listed.contains(service)) who.insert(hb.node);
    else who.erase(hb.node);
  }
  for (auto& [service, host] : hosts_) {
    if (host != hb.node || listed.contains(service)) continue;
    // Dropped by its host. Another live advertiser means a duplicate just resolved.
    host.reset();
    for (const auto other : advertisers_[service]) {
      if (liveness_.usable(other)) {
        host = other;
        break;
      }
    }
    if (!host) vacated_by_[service] = hb.node;
  }
}

void NodeController::on_activity(NodeId from) {
  if (active_ && from != self_) liveness_.heartbeat(from, kernel_.now());
}

std::vector<NodeId> NodeController::check_liveness() {
  if (!active_) return {};
  auto newly_offline = liveness_.check(kernel_.now());
  reconcile_orphans();
  return newly_offline;
}

void NodeController::reconcile_orphans() {
  // A rebooted node that has heard no advertiser for two offline timeouts
  // treats the service as unplaced.
  const bool settled = kernel_.now() - boot_time_ > 2 * config_.offline_timeout;

  std::map<std::string, NodeId> offline_hosted;
  std::vector<std::pair<std::string, NodeId>> vacated;
  for (auto& [service, host] : hosts_) {
    if (running_.contains(service) || starting_.contains(service)) continue;
    if (host && *host == self_) {
      // Our own instance died.
      host.reset();
      vacated_by_[service] = self_;
    }
    if (host) {
      if (liveness_.state(*host) == Liveness::kOffline) offline_hosted[service] = *host;
      continue;
    }
    if (auto it = vacated_by_.find(service); it != vacated_by_.end()) {
      if (liveness_.state(it->second) == Liveness::kOffline) offline_hosted[service] = it->second;
      else vacated.emplace_back(service, it->second);
    } else if (settled) {
      // Host never learned since boot: nobody advertised it.
      vacated.emplace_back(service, layout_.placement(service).primary);
    }
  }

  std::set<NodeId> offline_nodes;
  for (const auto& [_, node] : offline_hosted) offline_nodes.insert(node);
  for (const auto node : offline_nodes) {
    const auto plan = plan_failover(node, layout_, liveness_, offline_hosted, policy_);
    for (const auto& move : plan.moves) {
      reported_unplaceable_.erase(move.service);
      if (move.target == self_) confirm_and_take_over(move.service, node);
    }
    for (const auto& service : plan.unplaceable) {
      if (reported_unplaceable_.insert(service).second && hooks_.unplaceable) hooks_.unplaceable(service);
    }
  }
  for (const auto& [service, from] : vacated) {
    auto target = policy_(service, layout_.placement(service), from, liveness_);
    if (!target) {
      if (reported_unplaceable_.insert(service).second && hooks_.unplaceable) hooks_.unplaceable(service);
      continue;
    }
    reported_unplaceable_.erase(service);
    if (*target == self_) take_over(service, from);
  }
}

void NodeController::take_over(const std::string& service, NodeId from) {
  if (running_.contains(service) || starting_.contains(service)) return;
  execute_redeploy(service, from);
}

void NodeController::confirm_and_take_over(const std::string& service, NodeId from) {
  if (running_.contains(service) || starting_.contains(service)) return;
  if (!hooks_.probe) {
    take_over(service, from);
    return;
  }
  auto [it, first] = probing_.try_emplace(from);
  it->second.insert(service);
  if (!first) return;
  hooks_.probe(from, [this, from, epoch = epoch_](bool reachable) {
    if (epoch != epoch_ || !active_) return;
    auto node = probing_.extract(from);
    if (node.empty()) return;
    if (reachable) {
      liveness_.heartbeat(from, kernel_.now());
      return;
    }
    for (const auto& service : node.mapped()) {
      // Someone else may have claimed it while the probe ran.
      auto h = hosts_.find(service);
      if (h != hosts_.end() && h->second && *h->second != from && liveness_.usable(*h->second)) continue;
      take_over(service, from);
    }
  });
}

SimTime NodeController::execute_redeploy(const std::string& service, NodeId from) {
  if (!active_) throw std::logic_error("redeploy on a stopped node");
  if (running_.contains(service)) throw std::logic_error("service '" + service + "' already runs here");
  const SimTime detected = kernel_.now();
  const Duration start_time = layout_.spec(service).start_time.sample(start_rng_);
  const SimTime done = detected + start_time;
  starting_[service] = schedule(done, [this, service, from, detected, start_time] {
    starting_.erase(service);
    running_.insert(service);
    hosts_[service] = self_;
    vacated_by_.erase(service);
    if (hooks_.service_started) hooks_.service_started(service);
    if (hooks_.redeployed) hooks_.redeployed(Redeploy{service, from, self_, detected, kernel_.now(), start_time});
  }, "redeploy-complete");
  return done;
}

bool NodeController::kill_service(const std::string& service) {
  if (!running_.contains(service)) return false;
  stop_service(service);
  return true;
}

std::optional<NodeId> NodeController::believed_host(const std::string& service) const {
  if (running_.contains(service)) return self_;
  auto it = hosts_.find(service);
  if (it == hosts_.end() || !it->second) return std::nullopt;
  if (liveness_.state(*it->second) == Liveness::kOffline) return std::nullopt;
  return it->second;
}

}  // namespace lorasim::cluster
