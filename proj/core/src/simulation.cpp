#include "lorasim/scenario/simulation.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "lorasim/codec/frame.hpp"
#include "lorasim/radio/duty_cycle.hpp"

namespace lorasim::scenario {

struct Simulation::Node {
  NodeId id = 0;
  bool alive = true;
  std::unique_ptr<transport::ReliableTransport> transport;
  std::unique_ptr<cluster::NodeController> controller;
  std::unique_ptr<metrics::MetricsAgent> metrics;
  std::unique_ptr<metrics::SyncAgent> sync;
  std::map<std::uint64_t, std::function<void(bool)>> probes;
};

Simulation::Simulation(ScenarioConfig config) : config_(std::move(config)), rng_(config_.seed) {
  config_.validate();
  layout_ = config_.layout();
  offsets_ = config_.start_offsets();

  std::vector<radio::NodePosition> positions;
  for (const auto& n : config_.nodes) positions.push_back({n.id, n.x, n.y, n.z});
  medium_ = std::make_unique<radio::Medium>(kernel_, rng_, config_.radio, config_.channel, positions);
  medium_->set_listen_predicate([this](NodeId rx) { return alive(rx); });
  medium_->set_receive_sink([this](NodeId rx, const radio::TransmissionRecord& rec) { on_receive(rx, rec); });

  auto sync_config = config_.sync;
  // Leave time for the last version to spread before the run ends.
  const auto settle = std::min(config_.duration / 4, Duration(std::chrono::minutes(30)));
  sync_config.last_publish = SimTime::from(config_.duration - settle);

  const auto ids = config_.node_ids();
  for (const auto& nc : config_.nodes) {
    auto n = std::make_unique<Node>();
    n->id = nc.id;
    Node* raw = n.get();
    n->transport = std::make_unique<transport::ReliableTransport>(
        nc.id, kernel_, *medium_, rng_, config_.transport,
        transport::ReliableTransport::Hooks{
            [raw](const transport::Delivery& d) {
              switch (d.kind) {
                case codec::FrameKind::kHeartbeat:
                  try {
                    raw->controller->on_heartbeat(cluster::decode_heartbeat(d.payload));
                  } catch (const std::invalid_argument&) {
                  }
                  break;
                case codec::FrameKind::kMetricsData: raw->metrics->on_delivery(d); break;
                default: raw->sync->on_delivery(d); break;
              }
            },
            [raw](const transport::TransferOutcome& o) {
              if (auto p = raw->probes.extract(o.serial)) {
                p.mapped()(o.state == transport::TransferState::kCompleted);
                return;
              }
              if (o.kind == codec::FrameKind::kMetricsData) raw->metrics->on_outcome(o);
              else raw->sync->on_outcome(o);
            }});
    n->controller = std::make_unique<cluster::NodeController>(
        nc.id, ids, layout_, config_.cluster, kernel_, rng_,
        cluster::NodeController::Hooks{
            [raw](const cluster::HeartbeatPayload& hb) {
              if (raw->transport->alive())
                raw->transport->send_best_effort(kBroadcast, codec::FrameKind::kHeartbeat, cluster::encode_heartbeat(hb));
            },
            [this, id = nc.id](const std::string& s) { on_service_started(id, s); },
            [this, id = nc.id](const std::string& s) { on_service_stopped(id, s); },
            [this](const cluster::Redeploy& r) { on_redeployed(r); },
            [this](const std::string&) { ++unplaceable_events_; },
            [raw](NodeId peer, std::function<void(bool)> done) {
              if (!raw->transport->alive()) return;
              static const std::vector<std::uint8_t> kProbe{'P', 'R', 'O', 'B', 'E'};
              const auto h = raw->transport->send_reliable(peer, codec::FrameKind::kData, kProbe);
              raw->probes.emplace(h.serial, std::move(done));
            }});
    n->metrics = std::make_unique<metrics::MetricsAgent>(nc.id, config_.metrics, nc.reports_metrics, kernel_, rng_,
                                                         *n->transport, *n->controller, ingestor_, ledger_);
    n->sync = std::make_unique<metrics::SyncAgent>(nc.id, ids, sync_config, kernel_, *n->transport);
    nodes_.push_back(std::move(n));
  }
  for (const auto& s : layout_.services()) down_since_[s] = SimTime{};
}

Simulation::~Simulation() = default;

Simulation::Node& Simulation::node(NodeId id) {
  for (auto& n : nodes_) {
    if (n->id == id) return *n;
  }
  throw std::out_of_range("unknown node " + std::to_string(id));
}

const Simulation::Node& Simulation::node(NodeId id) const {
  return const_cast<Simulation*>(this)->node(id);
}

bool Simulation::alive(NodeId id) const {
  for (const auto& n : nodes_) {
    if (n->id == id) return n->alive;
  }
  return false;
}

const transport::ReliableTransport& Simulation::transport(NodeId id) const { return *node(id).transport; }
const cluster::NodeController& Simulation::controller(NodeId id) const { return *node(id).controller; }
const metrics::MetricsAgent& Simulation::metrics_agent(NodeId id) const { return *node(id).metrics; }
const metrics::SyncAgent& Simulation::sync_agent(NodeId id) const { return *node(id).sync; }

std::vector<NodeId> Simulation::hosts_of(const std::string& service) const {
  std::vector<NodeId> out;
  if (auto it = running_.find(service); it != running_.end()) {
    for (const auto& [n, _] : it->second) out.push_back(n);
  }
  return out;
}

void Simulation::on_receive(NodeId rx, const radio::TransmissionRecord& rec) {
  auto& n = node(rx);
  if (!n.alive) return;
  codec::Frame frame;
  try {
    frame = codec::decode_frame(rec.wire);
  } catch (const codec::FrameError&) {
    ++undecodable_frames_;
    return;
  }
  n.controller->on_activity(frame.header.source);
  n.transport->on_frame_received(frame);
}

void Simulation::on_service_started(NodeId id, const std::string& service) {
  auto& hosts = running_[service];
  hosts[id] = kernel_.now();
  if (hosts.size() == 2) overlap_since_[service] = kernel_.now();
}

void Simulation::on_service_stopped(NodeId id, const std::string& service) {
  auto& hosts = running_[service];
  if (!hosts.erase(id)) return;
  if (hosts.size() == 1) {
    overlaps_.push_back({service, overlap_since_.at(service), kernel_.now()});
    overlap_since_.erase(service);
  }
  if (hosts.empty()) down_since_[service] = kernel_.now();
}

void Simulation::on_redeployed(const cluster::Redeploy& r) {
  FailoverRow row;
  row.service = r.service;
  row.from = r.from;
  row.to = r.to;
  row.image_size_mb = layout_.spec(r.service).image_size_mb;
  row.detected_at = r.detected;
  row.completed_at = r.completed;
  // Downtime begins when the last instance stopped. If another instance was
  // still up when the takeover was decided, the detection was spurious.
  const auto& hosts = running_[r.service];
  row.spurious = hosts.size() > 1;
  const SimTime down = down_since_.count(r.service) ? down_since_.at(r.service) : r.detected;
  row.failed_at = row.spurious || down > r.detected ? r.detected : down;
  row.detect = r.detected - row.failed_at;
  row.start = r.completed - r.detected;
  row.total = row.detect + row.start;
  failovers_.push_back(std::move(row));
}

void Simulation::kill_node(NodeId id) {
  auto& n = node(id);
  if (!n.alive) return;
  n.alive = false;
  n.controller->stop();
  n.metrics->stop();
  n.sync->stop();
  n.transport->shutdown();
}

void Simulation::revive_node(NodeId id) {
  auto& n = node(id);
  if (n.alive) return;
  n.alive = true;
  n.transport->restart();
  n.controller->boot(false);
  const auto off = offsets_.count(id) ? offsets_.at(id) : Duration(0);
  n.metrics->start(off);
  n.sync->start();
}

void Simulation::kill_service(const std::string& service) {
  for (const auto host : hosts_of(service)) node(host).controller->kill_service(service);
}

RunResult Simulation::run() {
  if (ran_) throw std::logic_error("a simulation runs once");
  ran_ = true;
  for (auto& n : nodes_) {
    n->controller->boot(true);
    const auto off = offsets_.count(n->id) ? offsets_.at(n->id) : Duration(0);
    n->metrics->start(off);
    n->sync->start();
  }
  for (const auto& f : config_.faults) {
    kernel_.schedule(f.at, [this, f] {
      switch (f.kind) {
        case FaultEvent::Kind::kKillNode: kill_node(f.node); break;
        case FaultEvent::Kind::kReviveNode: revive_node(f.node); break;
        case FaultEvent::Kind::kKillService: kill_service(f.service); break;
      }
    }, std::nullopt, "fault");
  }
  // The run covers [0, duration); nothing scheduled at the end instant fires.
  kernel_.run_until(SimTime::from(config_.duration - Duration(1)));
  return collect();
}

RunResult Simulation::collect() {
  RunResult r;
  const SimTime end = kernel_.now();
  r.latencies = ingestor_.records();
  r.timeseries = ingestor_.store().lines();
  r.failovers = failovers_;
  r.overlaps = overlaps_;
  for (const auto& [service, since] : overlap_since_) r.overlaps.push_back({service, since, end});

  std::map<NodeId, std::vector<radio::Interval>> airtime;
  for (const auto* rec : medium_->log()) {
    r.transmissions.push_back({rec->sender, rec->start, rec->end, rec->bytes, rec->delivered_to, rec->collided});
    airtime[rec->sender].push_back({rec->start, rec->end - rec->start});
  }

  auto& s = r.summary;
  s.scenario = config_.name;
  s.seed = config_.seed;
  s.duration = config_.duration;
  s.node_count = config_.nodes.size();
  s.spike_factor = config_.spike_threshold;

  std::vector<double> all;
  std::map<NodeId, std::vector<double>> by_node;
  for (const auto& rec : r.latencies) {
    const double v = to_seconds(rec.latency());
    all.push_back(v);
    by_node[rec.source].push_back(v);
  }
  s.latency = latency_stats(all, config_.spike_threshold);
  for (const auto& n : nodes_) {
    NodeSummary ns;
    ns.node = n->id;
    ns.sampled = n->metrics->stats().sampled;
    ns.ingested = by_node[n->id].size();
    ns.latency = latency_stats(by_node[n->id], config_.spike_threshold, s.latency.threshold_s);
    s.per_node.push_back(ns);
  }

  s.sampled = ledger_.sampled_count();
  s.ingested = ledger_.ingested_count();
  s.lost = ledger_.lost_count();
  s.in_flight = ledger_.in_flight_count();
  s.delivery_ratio = s.sampled ? static_cast<double>(s.ingested) / static_cast<double>(s.sampled) : 0.0;

  s.transmissions = r.transmissions.size();
  s.collisions = static_cast<std::uint64_t>(
      std::count_if(r.transmissions.begin(), r.transmissions.end(), [](const auto& t) { return t.collided; }));
  for (const auto& n : nodes_) {
    const auto& ts = n->transport->stats();
    s.retransmissions += ts.retransmissions;
    s.frames_sent += ts.frames_sent;
    s.transfers_failed += ts.failed;
  }
  const radio::DutyCycleLedger& duty = medium_->ledger();
  s.duty_cycle_budget_s = to_seconds(duty.budget());
  for (const auto& [_, iv] : airtime) {
    s.duty_cycle_peak_s = std::max(s.duty_cycle_peak_s, to_seconds(radio::peak_window_airtime(iv, config_.channel.duty_window)));
  }

  s.failovers = r.failovers;
  s.unplaceable_events = unplaceable_events_;
  s.ownership_overlaps = r.overlaps.size();
  for (const auto& o : r.overlaps) s.ownership_overlap_time += o.end - o.begin;
  for (const auto& service : layout_.services()) {
    if (!hosts_of(service).empty()) continue;
    const auto& p = layout_.placement(service);
    const bool placeable = std::any_of(p.fallbacks.begin(), p.fallbacks.end(), [&](NodeId f) { return alive(f); });
    if (placeable) s.unplaced_at_end.push_back(service);
  }

  s.sync_enabled = config_.sync.enabled;
  metrics::Version reference = 0;
  for (const auto& n : nodes_) {
    r.file_versions[n->id] = n->sync->state().current_version();
    if (n->id == config_.sync.publisher) reference = n->sync->state().current_version();
    s.sync_published += n->sync->stats().published;
    s.sync_rejected += n->sync->stats().rejected;
  }
  if (s.sync_enabled) {
    for (const auto& n : nodes_) {
      if (n->alive && r.file_versions[n->id] != reference) s.sync_converged = false;
    }
  }
  return r;
}

std::string latency_csv(const RunResult& r) {
  std::ostringstream os;
  os << "source,sequence,origin_us,ingest_us,latency_us\n";
  for (const auto& l : r.latencies) {
    os << int(l.source) << ',' << l.sequence << ',' << l.origin.us() << ',' << l.ingest.us() << ','
       << l.latency().count() << '\n';
  }
  return os.str();
}

std::string transmissions_csv(const RunResult& r) {
  std::ostringstream os;
  os << "sender,start_us,end_us,bytes,delivered_to,collided\n";
  for (const auto& t : r.transmissions) {
    os << int(t.sender) << ',' << t.start.us() << ',' << t.end.us() << ',' << t.bytes << ',';
    for (std::size_t i = 0; i < t.delivered_to.size(); ++i) os << (i ? "|" : "") << int(t.delivered_to[i]);
    os << ',' << (t.collided ? 1 : 0) << '\n';
  }
  return os.str();
}

std::string failover_csv(const RunResult& r) {
  std::ostringstream os;
  os << "detect_us,start_us,total_us,service,from,to\n";
  for (const auto& f : r.failovers) {
    os << f.detect.count() << ',' << f.start.count() << ',' << f.total.count() << ',' << f.service << ','
       << int(f.from) << ',' << int(f.to) << '\n';
  }
  return os.str();
}

namespace {

void write_file(const std::filesystem::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << content;
  if (!out) throw std::runtime_error("write failed for " + p.string());
}

}  // namespace

void write_outputs(const RunResult& r, const OutputPaths& paths, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_file(dir / paths.latency, latency_csv(r));
  write_file(dir / paths.transmissions, transmissions_csv(r));
  write_file(dir / paths.failover, failover_csv(r));
  std::string ts;
  for (const auto& l : r.timeseries) ts += l + '\n';
  write_file(dir / paths.timeseries, ts);
  write_file(dir / paths.summary, summary_to_json(r.summary));
}

RunResult run_scenario(ScenarioConfig config) {
  Simulation sim(std::move(config));
  return sim.run();
}

}  // namespace lorasim::scenario
