#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "lorasim/cluster/controller.hpp"
#include "lorasim/sim/kernel.hpp"
#include "lorasim/sim/rng.hpp"
#include "lorasim/time.hpp"
#include "lorasim/transport/reliable.hpp"

namespace lorasim::metrics {

struct MetricsPacket {
  NodeId source = 0;
  std::uint32_t sequence = 0;
  SimTime origin;
  double cpu_percent = 0;
  double memory_percent = 0;
  std::vector<std::string> running_services;
  /// Forwarding hops taken so far.
  std::uint8_t hops = 0;

  bool operator==(const MetricsPacket&) const = default;
};

/// Text record "M1;src;seq;origin_us;hops;cpu;mem;svc,svc;" followed by '.'
/// padding up to `pad_to` bytes (never truncated).
std::vector<std::uint8_t> encode_metrics(const MetricsPacket& p, std::size_t pad_to = 0);
/// Throws std::invalid_argument on malformed input.
MetricsPacket decode_metrics(std::span<const std::uint8_t> bytes);

/// Gauges as uniform noise around a baseline.
struct LoadModel {
  double cpu_base = 20;
  double cpu_spread = 10;
  double memory_base = 40;
  double memory_spread = 5;
};

MetricsPacket sample_metrics(NodeId node, std::uint32_t sequence, SimTime t, const LoadModel& load,
                             sim::RngStream& rng, std::vector<std::string> running);

struct LatencyRecord {
  NodeId source = 0;
  std::uint32_t sequence = 0;
  SimTime origin;
  SimTime ingest;
  NodeId ingested_by = 0;

  Duration latency() const { return ingest - origin; }
};

/// Append-only series in line protocol:
/// `node_metrics,node=<n>,ingestor=<m> cpu=..,mem=..,seq=..i,latency_us=..i <origin_ns>`
class TimeSeriesStore {
 public:
  void append(const MetricsPacket& p, const LatencyRecord& r);
  const std::vector<std::string>& lines() const { return lines_; }
  void write(std::ostream& os) const;

 private:
  std::vector<std::string> lines_;
};

/// Idempotent ingestion keyed on (source, sequence).
class Ingestor {
 public:
  std::optional<LatencyRecord> ingest(const MetricsPacket& p, SimTime arrival, NodeId at);
  const std::vector<LatencyRecord>& records() const { return records_; }
  const TimeSeriesStore& store() const { return store_; }
  std::uint64_t duplicates() const { return duplicates_; }
  bool seen(NodeId source, std::uint32_t sequence) const { return seen_.contains({source, sequence}); }

 private:
  std::vector<LatencyRecord> records_;
  TimeSeriesStore store_;
  std::set<std::pair<NodeId, std::uint32_t>> seen_;
  std::uint64_t duplicates_ = 0;
};

/// Tracks every sampled packet until it is ingested or its last copy is gone,
/// so sampled == ingested + lost + in_flight holds at every instant.
class PacketLedger {
 public:
  using Key = std::pair<NodeId, std::uint32_t>;

  void sampled(Key k);
  void copy_created(Key k);
  void copy_dropped(Key k);
  void ingested(Key k);

  std::uint64_t sampled_count() const { return sampled_; }
  std::uint64_t ingested_count() const { return ingested_; }
  std::uint64_t lost_count() const { return lost_; }
  std::uint64_t in_flight_count() const { return sampled_ - ingested_ - lost_; }

 private:
  struct Entry {
    int copies = 0;
    bool ingested = false;
    bool lost = false;
  };
  std::map<Key, Entry> entries_;
  std::uint64_t sampled_ = 0;
  std::uint64_t ingested_ = 0;
  std::uint64_t lost_ = 0;
};

struct MetricsConfig {
  Duration interval = std::chrono::minutes(5);
  std::size_t payload_bytes = 256;
  std::string ingestor_service = "influxdb";
  std::size_t buffer_limit = 32;
  int max_hops = 3;
  /// Re-buffer attempts after a failed transfer before the copy is dropped.
  int max_resends = 3;
  Duration flush_interval = std::chrono::seconds(5);
  LoadModel load;
};

struct MetricsStats {
  std::uint64_t sampled = 0;
  std::uint64_t sent = 0;
  std::uint64_t forwarded = 0;
  std::uint64_t buffered = 0;
  std::uint64_t buffer_overflow = 0;
  std::uint64_t resends = 0;
  std::uint64_t dropped = 0;
};

/// Per-node collector: samples on a fixed period, ingests locally when the
/// node hosts the ingestor, otherwise sends to the believed ingestor host and
/// buffers while none is known.
class MetricsAgent {
 public:
  MetricsAgent(NodeId self, MetricsConfig config, bool reporter, sim::Kernel& kernel, sim::RngRegistry& rng,
               transport::ReliableTransport& transport, cluster::NodeController& controller, Ingestor& ingestor,
               PacketLedger& ledger);
  ~MetricsAgent();
  MetricsAgent(const MetricsAgent&) = delete;
  MetricsAgent& operator=(const MetricsAgent&) = delete;

  /// First sample at now + offset, then every interval.
  void start(Duration offset);
  /// Node death: pending samples, buffered packets and outbound copies are lost.
  void stop();

  void on_delivery(const transport::Delivery& d);
  void on_outcome(const transport::TransferOutcome& o);

  const MetricsStats& stats() const { return stats_; }
  std::size_t buffered() const { return buffer_.size(); }

 private:
  struct Held {
    MetricsPacket packet;
    int resends = 0;
  };

  sim::EventHandle schedule(SimTime at, std::function<void()> fn, const char* label);
  void sample();
  void route(Held held);
  void hold(Held held);
  void flush();
  void drop(const Held& held);
  static PacketLedger::Key key(const MetricsPacket& p) { return {p.source, p.sequence}; }

  NodeId self_;
  MetricsConfig config_;
  bool reporter_;
  sim::Kernel& kernel_;
  sim::RngStream& load_rng_;
  transport::ReliableTransport& transport_;
  cluster::NodeController& controller_;
  Ingestor& ingestor_;
  PacketLedger& ledger_;

  bool active_ = false;
  std::uint32_t next_sequence_ = 0;
  std::deque<Held> buffer_;
  std::map<std::uint64_t, Held> outbound_;
  bool flush_armed_ = false;
  std::set<std::uint64_t> scheduled_;
  MetricsStats stats_;
};

}  // namespace lorasim::metrics
