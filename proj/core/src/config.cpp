#include "lorasim/scenario/config.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>

#include "lorasim/scenario/presets.hpp"

namespace lorasim::scenario {

// --- config invariants ------------------------------------------------------

std::vector<NodeId> ScenarioConfig::node_ids() const {
  std::vector<NodeId> ids;
  for (const auto& n : nodes) ids.push_back(n.id);
  return ids;
}

std::map<NodeId, Duration> ScenarioConfig::start_offsets() const {
  std::map<NodeId, Duration> out;
  std::vector<NodeId> reporters;
  for (const auto& n : nodes) {
    if (n.reports_metrics) reporters.push_back(n.id);
  }
  std::sort(reporters.begin(), reporters.end());
  for (std::size_t k = 0; k < reporters.size(); ++k) {
    switch (offset_mode) {
      case OffsetMode::kSynchronized: out[reporters[k]] = Duration(0); break;
      case OffsetMode::kStaggered:
        out[reporters[k]] = metrics.interval * static_cast<std::int64_t>(k) / static_cast<std::int64_t>(reporters.size());
        break;
      case OffsetMode::kExplicit: {
        auto it = explicit_offsets.find(reporters[k]);
        out[reporters[k]] = it == explicit_offsets.end() ? Duration(0) : it->second;
        break;
      }
    }
  }
  return out;
}

cluster::ServiceLayout ScenarioConfig::layout() const {
  cluster::ServiceLayout l;
  for (const auto& s : services) l.add(s.spec, s.placement);
  return l;
}

void ScenarioConfig::validate() const {
  if (duration <= Duration(0)) throw ValidationError("duration", "must be positive");
  if (nodes.empty()) throw ValidationError("nodes", "at least one node is required");
  std::set<NodeId> ids;
  for (const auto& n : nodes) {
    if (n.id == kBroadcast) throw ValidationError("nodes", "node id 255 is reserved for broadcast");
    if (!ids.insert(n.id).second) throw ValidationError("nodes", "duplicate node id " + std::to_string(n.id));
  }
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    for (std::size_t j = i + 1; j < nodes.size(); ++j) {
      if (nodes[i].x == nodes[j].x && nodes[i].y == nodes[j].y && nodes[i].z == nodes[j].z)
        throw ValidationError("nodes", "nodes " + std::to_string(nodes[i].id) + " and " +
                                           std::to_string(nodes[j].id) + " share a position");
    }
  }
  try {
    radio.validate();
  } catch (const std::invalid_argument& e) {
    throw ValidationError("radio", e.what());
  }
  if (!(channel.frame_loss >= 0.0 && channel.frame_loss < 1.0))
    throw ValidationError("channel.frame_loss", "must lie in [0, 1)");
  if (channel.path_loss.shadowing_sigma_db < 0) throw ValidationError("channel.shadowing_sigma_db", "must be >= 0");
  if (channel.duty_budget_num <= 0 || channel.duty_budget_den <= 0 ||
      channel.duty_budget_num > channel.duty_budget_den)
    throw ValidationError("channel.duty_cycle", "must lie in (0, 1]");

  if (metrics.interval <= Duration(0)) throw ValidationError("metrics.interval", "must be positive");
  if (metrics.buffer_limit == 0) throw ValidationError("metrics.buffer_limit", "must be positive");
  if (spike_threshold <= 0) throw ValidationError("metrics.spike_threshold", "must be positive");
  if (offset_mode == OffsetMode::kExplicit) {
    for (const auto& [node, off] : explicit_offsets) {
      if (!ids.contains(node))
        throw ValidationError("metrics.start_offsets", "unknown node " + std::to_string(node));
      if (off < Duration(0) || off >= metrics.interval)
        throw ValidationError("metrics.start_offsets", "offset of node " + std::to_string(node) +
                                                           " must lie in [0, interval)");
    }
  }

  if (transport.max_retries < 0) throw ValidationError("transport.max_retries", "must be >= 0");
  if (transport.gap_timeout_floor <= Duration(0)) throw ValidationError("transport.gap_timeout_floor", "must be positive");
  if (transport.retransmit_backoff < Duration(0)) throw ValidationError("transport.retransmit_backoff", "must be >= 0");

  if (cluster.heartbeat_interval <= Duration(0)) throw ValidationError("cluster.heartbeat_interval", "must be positive");
  if (cluster.offline_timeout <= cluster.heartbeat_interval)
    throw ValidationError("cluster.offline_timeout", "must exceed the heartbeat interval");
  if (cluster.suspect_timeout > cluster.offline_timeout)
    throw ValidationError("cluster.suspect_timeout", "must not exceed the offline timeout");
  if (cluster.heartbeat_jitter < 0 || cluster.heartbeat_jitter >= 1)
    throw ValidationError("cluster.heartbeat_jitter", "must lie in [0, 1)");
  if (cluster.check_interval <= Duration(0)) throw ValidationError("cluster.check_interval", "must be positive");

  try {
    layout().validate(ids);
  } catch (const std::invalid_argument& e) {
    throw ValidationError("services", e.what());
  }

  const auto l = layout();
  for (const auto& f : faults) {
    if (f.at.since_start() > duration) throw ValidationError("faults", "fault scheduled after the end of the run");
    if (f.kind == FaultEvent::Kind::kKillService) {
      if (!l.contains(f.service)) throw ValidationError("faults", "unknown service '" + f.service + "'");
    } else if (!ids.contains(f.node)) {
      throw ValidationError("faults", "unknown node " + std::to_string(f.node));
    }
  }

  if (sync.enabled) {
    if (!ids.contains(sync.publisher)) throw ValidationError("sync.publisher", "unknown node");
    if (sync.interval <= Duration(0)) throw ValidationError("sync.interval", "must be positive");
    if (sync.bundle_bytes == 0 || sync.snapshot_bytes == 0) throw ValidationError("sync", "bundle sizes must be positive");
  }
}

std::vector<NodeConfig> default_nodes() {
  return {
      {0, 0, 0, 0, true}, {1, 6, 3, 0, true}, {2, 3, 8, 3, true}, {3, 10, 2, 3, true}, {4, 12, 9, 0, true},
  };
}

std::vector<ServiceEntry> default_services(const std::vector<NodeConfig>& nodes) {
  std::vector<NodeId> ids;
  for (const auto& n : nodes) ids.push_back(n.id);
  std::vector<ServiceEntry> out;
  auto place = [&](const std::string& id, double size_mb, std::size_t first) {
    if (ids.size() < first + 2) return;
    ServiceEntry e;
    e.spec.id = id;
    e.spec.image_size_mb = size_mb;
    e.placement.primary = ids[first];
    for (std::size_t i = first + 1; i < ids.size() && i <= first + 2; ++i) e.placement.fallbacks.push_back(ids[i]);
    out.push_back(std::move(e));
  };
  place("influxdb", 339, 0);
  place("grafana", 339, 1);
  return out;
}

ConfigError::ConfigError(const std::string& origin, int line, int column, const std::string& message)
    : std::runtime_error(origin + ":" + std::to_string(line) + ":" + std::to_string(column) + ": " + message),
      line_(line),
      column_(column) {}

// --- YAML reader --------------------------------------------------------------

namespace {

class Reader {
 public:
  explicit Reader(std::string origin) : origin_(std::move(origin)) {}

  [[noreturn]] void fail(const YAML::Node& at, const std::string& message) const {
    const auto m = at.Mark();
    throw ConfigError(origin_, m.line + 1, m.column + 1, message);
  }

  void remember(const std::string& field, const YAML::Node& n) { marks_[field] = n.Mark(); }

  [[noreturn]] void fail_validation(const ValidationError& e) const {
    // Most specific recorded key that prefixes the failing field.
    std::string key = e.field();
    for (;;) {
      if (auto it = marks_.find(key); it != marks_.end())
        throw ConfigError(origin_, it->second.line + 1, it->second.column + 1, e.what());
      const auto dot = key.rfind('.');
      if (dot == std::string::npos) break;
      key.resize(dot);
    }
    throw ConfigError(origin_ + ": " + e.what());
  }

  void expect_map(const YAML::Node& n, const std::string& what) const {
    if (!n.IsMap()) fail(n, what + " must be a mapping");
  }

  void check_keys(const YAML::Node& n, std::initializer_list<const char*> allowed, const std::string& where) const {
    expect_map(n, where);
    for (auto it = n.begin(); it != n.end(); ++it) {
      const auto key = it->first.as<std::string>();
      if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
        std::string list;
        for (const char* a : allowed) list += std::string(list.empty() ? "" : ", ") + a;
        fail(it->first, "unknown key '" + key + "' in " + where + " (expected one of: " + list + ")");
      }
    }
  }

  template <typename T>
  T get(const YAML::Node& n, const std::string& what) const {
    if (!n.IsScalar()) fail(n, what + " must be a scalar");
    try {
      return n.as<T>();
    } catch (const YAML::BadConversion&) {
      fail(n, "cannot read " + what + " from '" + n.Scalar() + "'");
    }
  }

  std::int64_t get_int(const YAML::Node& n, const std::string& what, std::int64_t lo, std::int64_t hi) const {
    const auto v = get<std::int64_t>(n, what);
    if (v < lo || v > hi)
      fail(n, what + " must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    return v;
  }

  Duration get_duration(const YAML::Node& n, const std::string& what) const {
    if (!n.IsScalar()) fail(n, what + " must be a duration such as 30s or 5m");
    try {
      return parse_duration(n.Scalar());
    } catch (const std::invalid_argument& e) {
      fail(n, what + ": " + e.what());
    }
  }

  NodeId get_node(const YAML::Node& n, const std::string& what) const {
    return static_cast<NodeId>(get_int(n, what, 0, 254));
  }

 private:
  std::string origin_;
  std::map<std::string, YAML::Mark> marks_;
};

int parse_coding_rate(const Reader& r, const YAML::Node& n) {
  if (!n.IsScalar()) r.fail(n, "coding_rate must be 5..8 or 4/5..4/8");
  const auto& s = n.Scalar();
  if (s.size() == 3 && s[0] == '4' && s[1] == '/' && s[2] >= '5' && s[2] <= '8') return s[2] - '0';
  return static_cast<int>(r.get_int(n, "coding_rate", 5, 8));
}

void read_radio(Reader& r, const YAML::Node& n, radio::RadioParams& p) {
  r.check_keys(n, {"spreading_factor", "bandwidth", "coding_rate", "tx_power_dbm", "frequency_hz", "preamble_symbols",
                   "crc", "explicit_header", "low_data_rate_optimize"},
               "radio");
  r.remember("radio", n);
  if (auto v = n["spreading_factor"]) p.spreading_factor = static_cast<int>(r.get_int(v, "spreading_factor", 7, 12));
  if (auto v = n["bandwidth"]) {
    const auto bw = r.get_int(v, "bandwidth", 1, 1'000'000);
    if (bw != 125'000 && bw != 250'000 && bw != 500'000) r.fail(v, "bandwidth must be 125000, 250000 or 500000");
    p.bandwidth_hz = static_cast<std::uint32_t>(bw);
  }
  if (auto v = n["coding_rate"]) p.coding_rate_denominator = parse_coding_rate(r, v);
  if (auto v = n["tx_power_dbm"]) p.tx_power_dbm = static_cast<int>(r.get_int(v, "tx_power_dbm", -4, 20));
  if (auto v = n["frequency_hz"]) p.frequency_hz = static_cast<std::uint64_t>(r.get_int(v, "frequency_hz", 1, 3'000'000'000));
  if (auto v = n["preamble_symbols"]) p.preamble_symbols = static_cast<int>(r.get_int(v, "preamble_symbols", 6, 65535));
  if (auto v = n["crc"]) p.crc_enabled = r.get<bool>(v, "crc");
  if (auto v = n["explicit_header"]) p.explicit_header = r.get<bool>(v, "explicit_header");
  if (auto v = n["low_data_rate_optimize"]) p.low_data_rate_optimize = r.get<bool>(v, "low_data_rate_optimize");
}

void read_channel(Reader& r, const YAML::Node& n, radio::ChannelConfig& c) {
  r.check_keys(n, {"path_loss_exponent", "reference_loss_db", "shadowing_sigma_db", "frame_loss", "capture",
                   "capture_margin_db", "duty_cycle"},
               "channel");
  r.remember("channel", n);
  if (auto v = n["path_loss_exponent"]) c.path_loss.exponent = r.get<double>(v, "path_loss_exponent");
  if (auto v = n["reference_loss_db"]) c.path_loss.reference_loss_db = r.get<double>(v, "reference_loss_db");
  if (auto v = n["shadowing_sigma_db"]) {
    r.remember("channel.shadowing_sigma_db", v);
    c.path_loss.shadowing_sigma_db = r.get<double>(v, "shadowing_sigma_db");
  }
  if (auto v = n["frame_loss"]) {
    r.remember("channel.frame_loss", v);
    c.frame_loss = r.get<double>(v, "frame_loss");
  }
  if (auto v = n["capture"]) c.capture_enabled = r.get<bool>(v, "capture");
  if (auto v = n["capture_margin_db"]) c.capture_margin_db = r.get<double>(v, "capture_margin_db");
  if (auto v = n["duty_cycle"]) {
    r.remember("channel.duty_cycle", v);
    const double d = r.get<double>(v, "duty_cycle");
    if (!(d > 0 && d <= 1)) r.fail(v, "duty_cycle must lie in (0, 1]");
    // Budget kept as an exact fraction over 1e6.
    c.duty_budget_den = 1'000'000;
    c.duty_budget_num = std::max<std::int64_t>(1, static_cast<std::int64_t>(d * 1e6 + 0.5));
  }
}

std::vector<NodeConfig> read_nodes(Reader& r, const YAML::Node& n) {
  if (!n.IsSequence() || n.size() == 0) r.fail(n, "nodes must be a non-empty list");
  r.remember("nodes", n);
  std::vector<NodeConfig> out;
  for (const auto& item : n) {
    r.check_keys(item, {"id", "position", "reports_metrics"}, "node");
    NodeConfig c;
    if (!item["id"]) r.fail(item, "node needs an id");
    c.id = r.get_node(item["id"], "node id");
    if (auto p = item["position"]) {
      if (!p.IsSequence() || (p.size() != 2 && p.size() != 3)) r.fail(p, "position must be [x, y] or [x, y, z]");
      c.x = r.get<double>(p[0], "x");
      c.y = r.get<double>(p[1], "y");
      if (p.size() == 3) c.z = r.get<double>(p[2], "z");
    } else {
      r.fail(item, "node " + std::to_string(c.id) + " needs a position");
    }
    if (auto v = item["reports_metrics"]) c.reports_metrics = r.get<bool>(v, "reports_metrics");
    out.push_back(c);
  }
  return out;
}

void read_metrics(Reader& r, const YAML::Node& n, ScenarioConfig& cfg) {
  r.check_keys(n, {"interval", "payload_bytes", "start_offsets", "ingestor_service", "buffer_limit", "max_hops",
                   "spike_threshold", "cpu_base", "cpu_spread", "memory_base", "memory_spread"},
               "metrics");
  r.remember("metrics", n);
  auto& m = cfg.metrics;
  if (auto v = n["interval"]) {
    r.remember("metrics.interval", v);
    m.interval = r.get_duration(v, "interval");
  }
  if (auto v = n["payload_bytes"]) m.payload_bytes = static_cast<std::size_t>(r.get_int(v, "payload_bytes", 0, 65536));
  if (auto v = n["ingestor_service"]) m.ingestor_service = r.get<std::string>(v, "ingestor_service");
  if (auto v = n["buffer_limit"]) {
    r.remember("metrics.buffer_limit", v);
    m.buffer_limit = static_cast<std::size_t>(r.get_int(v, "buffer_limit", 0, 1'000'000));
  }
  if (auto v = n["max_hops"]) m.max_hops = static_cast<int>(r.get_int(v, "max_hops", 1, 16));
  if (auto v = n["spike_threshold"]) {
    r.remember("metrics.spike_threshold", v);
    cfg.spike_threshold = r.get<double>(v, "spike_threshold");
  }
  if (auto v = n["cpu_base"]) m.load.cpu_base = r.get<double>(v, "cpu_base");
  if (auto v = n["cpu_spread"]) m.load.cpu_spread = r.get<double>(v, "cpu_spread");
  if (auto v = n["memory_base"]) m.load.memory_base = r.get<double>(v, "memory_base");
  if (auto v = n["memory_spread"]) m.load.memory_spread = r.get<double>(v, "memory_spread");
  if (auto v = n["start_offsets"]) {
    r.remember("metrics.start_offsets", v);
    if (v.IsScalar()) {
      const auto mode = v.Scalar();
      if (mode == "staggered") cfg.offset_mode = OffsetMode::kStaggered;
      else if (mode == "synchronized") cfg.offset_mode = OffsetMode::kSynchronized;
      else r.fail(v, "start_offsets must be staggered, synchronized or a map of node id to offset");
    } else if (v.IsMap()) {
      cfg.offset_mode = OffsetMode::kExplicit;
      cfg.explicit_offsets.clear();
      for (auto it = v.begin(); it != v.end(); ++it) {
        const NodeId node = r.get_node(it->first, "start_offsets key");
        cfg.explicit_offsets[node] = r.get_duration(it->second, "start offset");
      }
    } else {
      r.fail(v, "start_offsets must be staggered, synchronized or a map of node id to offset");
    }
  }
}

void read_transport(Reader& r, const YAML::Node& n, transport::TransportConfig& t) {
  r.check_keys(n, {"max_retries", "gap_timeout_floor", "retransmit_backoff", "reassembly_timeout", "max_message_bytes"},
               "transport");
  r.remember("transport", n);
  if (auto v = n["max_retries"]) t.max_retries = static_cast<int>(r.get_int(v, "max_retries", 0, 100));
  if (auto v = n["gap_timeout_floor"]) t.gap_timeout_floor = r.get_duration(v, "gap_timeout_floor");
  if (auto v = n["retransmit_backoff"]) t.retransmit_backoff = r.get_duration(v, "retransmit_backoff");
  if (auto v = n["reassembly_timeout"]) t.reassembly_timeout = r.get_duration(v, "reassembly_timeout");
  if (auto v = n["max_message_bytes"])
    t.max_message_bytes = static_cast<std::size_t>(r.get_int(v, "max_message_bytes", 1, 1 << 24));
}

void read_cluster(Reader& r, const YAML::Node& n, cluster::ClusterConfig& c) {
  r.check_keys(n, {"heartbeat_interval", "offline_timeout", "suspect_timeout", "heartbeat_jitter", "check_interval"},
               "cluster");
  r.remember("cluster", n);
  if (auto v = n["heartbeat_interval"]) c.heartbeat_interval = r.get_duration(v, "heartbeat_interval");
  if (auto v = n["offline_timeout"]) c.offline_timeout = r.get_duration(v, "offline_timeout");
  if (auto v = n["suspect_timeout"]) c.suspect_timeout = r.get_duration(v, "suspect_timeout");
  if (auto v = n["heartbeat_jitter"]) c.heartbeat_jitter = r.get<double>(v, "heartbeat_jitter");
  if (auto v = n["check_interval"]) c.check_interval = r.get_duration(v, "check_interval");
}

cluster::StartTimeModel read_start_time(const Reader& r, const YAML::Node& n) {
  if (n.IsScalar()) {
    try {
      return cluster::StartTimeModel::named(n.Scalar());
    } catch (const std::exception&) {
      r.fail(n, "unknown start-time model '" + n.Scalar() + "'");
    }
  }
  r.check_keys(n, {"constant", "uniform", "samples"}, "start_time");
  if (n.size() != 1) r.fail(n, "start_time takes exactly one of constant, uniform, samples");
  if (auto v = n["constant"]) return cluster::StartTimeModel::constant_of(r.get_duration(v, "constant"));
  if (auto v = n["uniform"]) {
    if (!v.IsSequence() || v.size() != 2) r.fail(v, "uniform takes [low, high]");
    const auto lo = r.get_duration(v[0], "low");
    const auto hi = r.get_duration(v[1], "high");
    if (hi < lo) r.fail(v, "uniform bounds are reversed");
    return cluster::StartTimeModel::uniform_between(lo, hi);
  }
  const auto v = n["samples"];
  if (!v.IsSequence() || v.size() == 0) r.fail(v, "samples must be a non-empty list");
  std::vector<Duration> samples;
  for (const auto& s : v) samples.push_back(r.get_duration(s, "sample"));
  return cluster::StartTimeModel::empirical(std::move(samples), "custom");
}

std::vector<ServiceEntry> read_services(Reader& r, const YAML::Node& n) {
  if (!n.IsSequence()) r.fail(n, "services must be a list");
  r.remember("services", n);
  std::vector<ServiceEntry> out;
  for (const auto& item : n) {
    r.check_keys(item, {"id", "image_size_mb", "start_time", "primary", "fallbacks"}, "service");
    ServiceEntry e;
    if (!item["id"]) r.fail(item, "service needs an id");
    e.spec.id = r.get<std::string>(item["id"], "service id");
    if (auto v = item["image_size_mb"]) e.spec.image_size_mb = r.get<double>(v, "image_size_mb");
    if (auto v = item["start_time"]) e.spec.start_time = read_start_time(r, v);
    if (!item["primary"]) r.fail(item, "service '" + e.spec.id + "' needs a primary");
    e.placement.primary = r.get_node(item["primary"], "primary");
    if (auto v = item["fallbacks"]) {
      if (!v.IsSequence()) r.fail(v, "fallbacks must be a list");
      for (const auto& f : v) e.placement.fallbacks.push_back(r.get_node(f, "fallback"));
    }
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<FaultEvent> read_faults(Reader& r, const YAML::Node& n) {
  if (!n.IsSequence()) r.fail(n, "faults must be a list");
  r.remember("faults", n);
  std::vector<FaultEvent> out;
  for (const auto& item : n) {
    r.check_keys(item, {"at", "kill_node", "revive_node", "kill_service"}, "fault");
    if (!item["at"]) r.fail(item, "fault needs 'at'");
    if (item.size() != 2) r.fail(item, "fault takes 'at' and exactly one action");
    FaultEvent f;
    f.at = SimTime::from(r.get_duration(item["at"], "at"));
    if (auto v = item["kill_node"]) {
      f.kind = FaultEvent::Kind::kKillNode;
      f.node = r.get_node(v, "kill_node");
    } else if (auto v2 = item["revive_node"]) {
      f.kind = FaultEvent::Kind::kReviveNode;
      f.node = r.get_node(v2, "revive_node");
    } else {
      f.kind = FaultEvent::Kind::kKillService;
      f.service = r.get<std::string>(item["kill_service"], "kill_service");
    }
    out.push_back(std::move(f));
  }
  return out;
}

void read_sync(Reader& r, const YAML::Node& n, metrics::SyncConfig& s) {
  r.check_keys(n, {"enabled", "publisher", "interval", "bundle_bytes", "snapshot_bytes"}, "sync");
  r.remember("sync", n);
  s.enabled = true;
  if (auto v = n["enabled"]) s.enabled = r.get<bool>(v, "enabled");
  if (auto v = n["publisher"]) {
    r.remember("sync.publisher", v);
    s.publisher = r.get_node(v, "publisher");
  }
  if (auto v = n["interval"]) {
    r.remember("sync.interval", v);
    s.interval = r.get_duration(v, "interval");
  }
  if (auto v = n["bundle_bytes"]) s.bundle_bytes = static_cast<std::size_t>(r.get_int(v, "bundle_bytes", 1, 1 << 20));
  if (auto v = n["snapshot_bytes"])
    s.snapshot_bytes = static_cast<std::size_t>(r.get_int(v, "snapshot_bytes", 1, 1 << 20));
}

void read_outputs(Reader& r, const YAML::Node& n, OutputPaths& o) {
  r.check_keys(n, {"latency", "transmissions", "failover", "timeseries", "summary"}, "outputs");
  if (auto v = n["latency"]) o.latency = r.get<std::string>(v, "latency");
  if (auto v = n["transmissions"]) o.transmissions = r.get<std::string>(v, "transmissions");
  if (auto v = n["failover"]) o.failover = r.get<std::string>(v, "failover");
  if (auto v = n["timeseries"]) o.timeseries = r.get<std::string>(v, "timeseries");
  if (auto v = n["summary"]) o.summary = r.get<std::string>(v, "summary");
}

ScenarioConfig defaults() {
  ScenarioConfig c;
  c.nodes = default_nodes();
  c.services = default_services(c.nodes);
  return c;
}

}  // namespace

ScenarioConfig parse_scenario_text(const std::string& text, const std::string& origin,
                                   const std::optional<ScenarioConfig>& base) {
  Reader r(origin);
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(origin, e.mark.line + 1, e.mark.column + 1, e.msg);
  }
  if (root.IsNull()) root = YAML::Node(YAML::NodeType::Map);
  r.check_keys(root, {"preset", "name", "seed", "duration", "radio", "channel", "nodes", "metrics", "transport",
                      "cluster", "services", "faults", "sync", "outputs"},
               "scenario");

  ScenarioConfig cfg = base ? *base : defaults();
  if (auto v = root["preset"]) {
    const auto name = r.get<std::string>(v, "preset");
    try {
      cfg = preset(name);
    } catch (const std::out_of_range&) {
      r.fail(v, "unknown preset '" + name + "'");
    }
  }
  if (auto v = root["name"]) cfg.name = r.get<std::string>(v, "name");
  if (auto v = root["seed"]) cfg.seed = r.get<std::uint64_t>(v, "seed");
  if (auto v = root["duration"]) {
    r.remember("duration", v);
    cfg.duration = r.get_duration(v, "duration");
  }
  if (auto v = root["radio"]) read_radio(r, v, cfg.radio);
  if (auto v = root["channel"]) read_channel(r, v, cfg.channel);
  if (auto v = root["nodes"]) {
    cfg.nodes = read_nodes(r, v);
    if (!root["services"]) cfg.services = default_services(cfg.nodes);
  }
  if (auto v = root["metrics"]) read_metrics(r, v, cfg);
  if (auto v = root["transport"]) read_transport(r, v, cfg.transport);
  if (auto v = root["cluster"]) read_cluster(r, v, cfg.cluster);
  if (auto v = root["services"]) cfg.services = read_services(r, v);
  if (auto v = root["faults"]) cfg.faults = read_faults(r, v);
  if (auto v = root["sync"]) read_sync(r, v, cfg.sync);
  if (auto v = root["outputs"]) read_outputs(r, v, cfg.outputs);

  try {
    cfg.validate();
  } catch (const ValidationError& e) {
    r.fail_validation(e);
  }
  return cfg;
}

ScenarioConfig parse_scenario(const std::string& path, const std::optional<ScenarioConfig>& base) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open scenario file");
  std::stringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw ConfigError(path + ": read error");
  return parse_scenario_text(ss.str(), path, base);
}

}  // namespace lorasim::scenario
