#include "lorasim/scenario/presets.hpp"

#include <functional>
#include <map>
#include <stdexcept>

namespace lorasim::scenario {

namespace {

using namespace std::chrono_literals;

ScenarioConfig base_config(const std::string& name) {
  ScenarioConfig c;
  c.name = name;
  c.nodes = default_nodes();
  c.services = default_services(c.nodes);
  return c;
}

/// Node 0 only ingests; the other four report.
ScenarioConfig four_transmitters(const std::string& name) {
  auto c = base_config(name);
  c.nodes[0].reports_metrics = false;
  return c;
}

ServiceEntry service(const std::string& id, double size_mb, NodeId primary, std::vector<NodeId> fallbacks) {
  ServiceEntry e;
  e.spec.id = id;
  e.spec.image_size_mb = size_mb;
  e.placement.primary = primary;
  e.placement.fallbacks = std::move(fallbacks);
  return e;
}

ScenarioConfig failover_imagesize() {
  auto c = base_config("failover-imagesize");
  c.services = {
      service("influxdb", 339, 0, {1, 2}),       service("grafana", 339, 1, {2, 3}),
      service("svc-small", 8.83, 2, {3, 4}),     service("svc-medium", 339, 3, {4, 0}),
      service("svc-large", 5470, 4, {0, 1}),
  };
  // One node down at a time, rotating every 15 minutes, each outage 6 minutes.
  NodeId victim = 2;
  for (auto t = Duration(30min); t + 6min + 30min <= c.duration; t += 15min) {
    c.faults.push_back({FaultEvent::Kind::kKillNode, SimTime::from(t), victim, {}});
    c.faults.push_back({FaultEvent::Kind::kReviveNode, SimTime::from(t + 6min), victim, {}});
    victim = static_cast<NodeId>((victim + 1) % 5);
  }
  return c;
}

ScenarioConfig failover_basic() {
  auto c = base_config("failover-basic");
  c.faults = {
      {FaultEvent::Kind::kKillNode, SimTime::from(Duration(2h)), 0, {}},
      {FaultEvent::Kind::kReviveNode, SimTime::from(Duration(4h)), 0, {}},
      {FaultEvent::Kind::kKillNode, SimTime::from(Duration(8h)), 2, {}},
      {FaultEvent::Kind::kReviveNode, SimTime::from(Duration(9h)), 2, {}},
      {FaultEvent::Kind::kKillService, SimTime::from(Duration(12h)), 0, "grafana"},
  };
  c.sync.enabled = true;
  c.sync.publisher = 1;
  c.sync.interval = 2h;
  c.sync.bundle_bytes = 2048;
  return c;
}

const std::map<std::string, std::function<ScenarioConfig()>>& registry() {
  static const std::map<std::string, std::function<ScenarioConfig()>> r = {
      {"baseline-4-node", [] { return four_transmitters("baseline-4-node"); }},
      {"baseline-5-node", [] { return base_config("baseline-5-node"); }},
      {"sync-start-4-node",
       [] {
         auto c = four_transmitters("sync-start-4-node");
         c.offset_mode = OffsetMode::kSynchronized;
         return c;
       }},
      {"interval-10min",
       [] {
         auto c = four_transmitters("interval-10min");
         c.metrics.interval = 10min;
         return c;
       }},
      {"bw-500k",
       [] {
         auto c = four_transmitters("bw-500k");
         c.radio.bandwidth_hz = 500'000;
         return c;
       }},
      {"cr-4-8",
       [] {
         auto c = four_transmitters("cr-4-8");
         c.radio.coding_rate_denominator = 8;
         return c;
       }},
      {"power-5dbm",
       [] {
         auto c = four_transmitters("power-5dbm");
         c.radio.tx_power_dbm = 5;
         return c;
       }},
      {"failover-basic", failover_basic},
      {"failover-imagesize", failover_imagesize},
  };
  return r;
}

}  // namespace

std::vector<std::string> preset_names() {
  std::vector<std::string> out;
  for (const auto& [name, _] : registry()) out.push_back(name);
  return out;
}

ScenarioConfig preset(const std::string& name) {
  const auto& r = registry();
  auto it = r.find(name);
  if (it == r.end()) throw std::out_of_range("unknown preset '" + name + "'");
  auto c = it->second();
  c.validate();
  return c;
}

}  // namespace lorasim::scenario
