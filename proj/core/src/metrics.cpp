#include "lorasim/metrics/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <memory>
#include <stdexcept>

namespace lorasim::metrics {

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  for (;;) {
    const auto next = s.find(sep, pos);
    out.push_back(s.substr(pos, next - pos));
    if (next == std::string::npos) break;
    pos = next + 1;
  }
  return out;
}

template <typename T>
T parse_int(const std::string& s, const char* what) {
  T value{};
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || end != s.data() + s.size()) throw std::invalid_argument(std::string("bad ") + what);
  return value;
}

double parse_double(const std::string& s, const char* what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(what);
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument(std::string("bad ") + what);
  }
}

std::string fixed2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

}  // namespace

std::vector<std::uint8_t> encode_metrics(const MetricsPacket& p, std::size_t pad_to) {
  std::string text = "M1;" + std::to_string(p.source) + ";" + std::to_string(p.sequence) + ";" +
                     std::to_string(p.origin.us()) + ";" + std::to_string(p.hops) + ";" + fixed2(p.cpu_percent) +
                     ";" + fixed2(p.memory_percent) + ";";
  for (std::size_t i = 0; i < p.running_services.size(); ++i) {
    if (i) text += ',';
    text += p.running_services[i];
  }
  text += ';';
  if (text.size() < pad_to) text.append(pad_to - text.size(), '.');
  return {text.begin(), text.end()};
}

MetricsPacket decode_metrics(std::span<const std::uint8_t> bytes) {
  const std::string text(bytes.begin(), bytes.end());
  const auto fields = split(text, ';');
  if (fields.size() != 9 || fields[0] != "M1") throw std::invalid_argument("not a metrics record");
  for (const char c : fields[8]) {
    if (c != '.') throw std::invalid_argument("bad metrics padding");
  }
  MetricsPacket p;
  const auto source = parse_int<unsigned>(fields[1], "source");
  if (source > 254) throw std::invalid_argument("bad source");
  p.source = static_cast<NodeId>(source);
  p.sequence = parse_int<std::uint32_t>(fields[2], "sequence");
  p.origin = SimTime(parse_int<std::uint64_t>(fields[3], "origin"));
  p.hops = parse_int<std::uint8_t>(fields[4], "hops");
  p.cpu_percent = parse_double(fields[5], "cpu");
  p.memory_percent = parse_double(fields[6], "memory");
  if (!fields[7].empty()) p.running_services = split(fields[7], ',');
  return p;
}

MetricsPacket sample_metrics(NodeId node, std::uint32_t sequence, SimTime t, const LoadModel& load,
                             sim::RngStream& rng, std::vector<std::string> running) {
  MetricsPacket p;
  p.source = node;
  p.sequence = sequence;
  p.origin = t;
  p.cpu_percent = std::clamp(rng.uniform(load.cpu_base - load.cpu_spread, load.cpu_base + load.cpu_spread), 0.0, 100.0);
  p.memory_percent =
      std::clamp(rng.uniform(load.memory_base - load.memory_spread, load.memory_base + load.memory_spread), 0.0, 100.0);
  p.running_services = std::move(running);
  return p;
}

void TimeSeriesStore::append(const MetricsPacket& p, const LatencyRecord& r) {
  std::string line = "node_metrics,node=" + std::to_string(p.source) + ",ingestor=" + std::to_string(r.ingested_by) +
                     " cpu=" + fixed2(p.cpu_percent) + ",mem=" + fixed2(p.memory_percent) +
                     ",seq=" + std::to_string(p.sequence) + "i,latency_us=" + std::to_string(r.latency().count()) +
                     "i,services=\"";
  for (std::size_t i = 0; i < p.running_services.size(); ++i) {
    if (i) line += ',';
    line += p.running_services[i];
  }
  line += "\" " + std::to_string(p.origin.us() * 1000);
  lines_.push_back(std::move(line));
}

void TimeSeriesStore::write(std::ostream& os) const {
  for (const auto& l : lines_) os << l << '\n';
}

std::optional<LatencyRecord> Ingestor::ingest(const MetricsPacket& p, SimTime arrival, NodeId at) {
  if (arrival < p.origin) throw std::invalid_argument("packet arrives before its origin timestamp");
  if (!seen_.insert({p.source, p.sequence}).second) {
    ++duplicates_;
    return std::nullopt;
  }
  LatencyRecord r{p.source, p.sequence, p.origin, arrival, at};
  records_.push_back(r);
  store_.append(p, r);
  return r;
}

void PacketLedger::sampled(Key k) {
  auto [it, fresh] = entries_.try_emplace(k);
  if (!fresh) throw std::logic_error("packet sampled twice");
  it->second.copies = 1;
  ++sampled_;
}

void PacketLedger::copy_created(Key k) {
  auto it = entries_.find(k);
  if (it == entries_.end()) throw std::logic_error("copy of an unknown packet");
  ++it->second.copies;
}

void PacketLedger::copy_dropped(Key k) {
  auto it = entries_.find(k);
  if (it == entries_.end() || it->second.copies == 0) throw std::logic_error("dropping a copy that does not exist");
  auto& e = it->second;
  if (--e.copies == 0 && !e.ingested) {
    e.lost = true;
    ++lost_;
  }
}

void PacketLedger::ingested(Key k) {
  auto it = entries_.find(k);
  if (it == entries_.end()) throw std::logic_error("ingesting an unknown packet");
  auto& e = it->second;
  if (e.ingested) return;
  if (e.lost) throw std::logic_error("ingesting a packet already counted lost");
  e.ingested = true;
  ++ingested_;
}

MetricsAgent::MetricsAgent(NodeId self, MetricsConfig config, bool reporter, sim::Kernel& kernel,
                           sim::RngRegistry& rng, transport::ReliableTransport& transport,
                           cluster::NodeController& controller, Ingestor& ingestor, PacketLedger& ledger)
    : self_(self),
      config_(std::move(config)),
      reporter_(reporter),
      kernel_(kernel),
      load_rng_(rng.register_stream(sim::streams::kLoad)),
      transport_(transport),
      controller_(controller),
      ingestor_(ingestor),
      ledger_(ledger) {}

MetricsAgent::~MetricsAgent() {
  for (const auto seq : scheduled_) kernel_.cancel(sim::EventHandle{seq});
}

sim::EventHandle MetricsAgent::schedule(SimTime at, std::function<void()> fn, const char* label) {
  auto slot = std::make_shared<std::uint64_t>(0);
  auto h = kernel_.schedule(
      at,
      [this, slot, fn = std::move(fn)] {
        scheduled_.erase(*slot);
        fn();
      },
      self_, label);
  *slot = h.sequence;
  scheduled_.insert(h.sequence);
  return h;
}

void MetricsAgent::start(Duration offset) {
  active_ = true;
  if (!reporter_) return;
  schedule(kernel_.now() + offset, [this] { sample(); }, "metrics-sample");
}

void MetricsAgent::stop() {
  active_ = false;
  for (const auto seq : scheduled_) kernel_.cancel(sim::EventHandle{seq});
  scheduled_.clear();
  flush_armed_ = false;
  for (const auto& h : buffer_) drop(h);
  buffer_.clear();
  for (const auto& [_, h] : outbound_) drop(h);
  outbound_.clear();
}

void MetricsAgent::sample() {
  const auto& running = controller_.running();
  auto p = sample_metrics(self_, next_sequence_++, kernel_.now(), config_.load, load_rng_,
                          {running.begin(), running.end()});
  ++stats_.sampled;
  ledger_.sampled(key(p));
  schedule(kernel_.now() + config_.interval, [this] { sample(); }, "metrics-sample");
  route(Held{std::move(p), 0});
}

void MetricsAgent::drop(const Held& held) {
  ++stats_.dropped;
  ledger_.copy_dropped(key(held.packet));
}

void MetricsAgent::route(Held held) {
  if (controller_.running().contains(config_.ingestor_service)) {
    if (ingestor_.ingest(held.packet, kernel_.now(), self_)) ledger_.ingested(key(held.packet));
    ledger_.copy_dropped(key(held.packet));
    return;
  }
  if (held.packet.hops >= config_.max_hops) {
    drop(held);
    return;
  }
  const auto host = controller_.believed_host(config_.ingestor_service);
  if (!host || *host == self_) {
    hold(std::move(held));
    return;
  }
  if (held.packet.source != self_) {
    ++held.packet.hops;
    ++stats_.forwarded;
  }
  const auto bytes = encode_metrics(held.packet, config_.payload_bytes);
  const auto handle = transport_.send_reliable(*host, codec::FrameKind::kMetricsData, bytes);
  ++stats_.sent;
  outbound_.emplace(handle.serial, std::move(held));
}

void MetricsAgent::hold(Held held) {
  ++stats_.buffered;
  if (buffer_.size() >= config_.buffer_limit) {
    ++stats_.buffer_overflow;
    drop(buffer_.front());
    buffer_.pop_front();
  }
  buffer_.push_back(std::move(held));
  if (!flush_armed_) {
    flush_armed_ = true;
    schedule(kernel_.now() + config_.flush_interval, [this] { flush(); }, "metrics-flush");
  }
}

void MetricsAgent::flush() {
  flush_armed_ = false;
  if (!active_) return;
  const bool ingesting = controller_.running().contains(config_.ingestor_service);
  const auto host = controller_.believed_host(config_.ingestor_service);
  if (!ingesting && (!host || *host == self_)) {
    flush_armed_ = true;
    schedule(kernel_.now() + config_.flush_interval, [this] { flush(); }, "metrics-flush");
    return;
  }
  auto pending = std::move(buffer_);
  buffer_.clear();
  for (auto& h : pending) route(std::move(h));
}

void MetricsAgent::on_delivery(const transport::Delivery& d) {
  if (!active_ || d.kind != codec::FrameKind::kMetricsData) return;
  MetricsPacket p;
  try {
    p = decode_metrics(d.payload);
  } catch (const std::invalid_argument&) {
    return;
  }
  ledger_.copy_created(key(p));
  route(Held{std::move(p), 0});
}

void MetricsAgent::on_outcome(const transport::TransferOutcome& o) {
  auto it = outbound_.find(o.serial);
  if (it == outbound_.end()) return;
  Held held = std::move(it->second);
  outbound_.erase(it);
  if (o.state == transport::TransferState::kCompleted) {
    ledger_.copy_dropped(key(held.packet));
    return;
  }
  if (!active_ || held.resends >= config_.max_resends) {
    drop(held);
    return;
  }
  ++held.resends;
  ++stats_.resends;
  if (held.packet.source != self_ && held.packet.hops > 0) --held.packet.hops;
  hold(std::move(held));
}

}  // namespace lorasim::metrics
