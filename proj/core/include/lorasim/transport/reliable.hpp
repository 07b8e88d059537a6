#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <vector>

#include "lorasim/codec/frame.hpp"
#include "lorasim/codec/reassembly.hpp"
#include "lorasim/radio/medium.hpp"
#include "lorasim/sim/kernel.hpp"
#include "lorasim/sim/rng.hpp"

namespace lorasim::transport {

using codec::FrameKind;

struct TransportConfig {
  int max_retries = 5;
  /// Lower bound on the receiver gap timer.
  Duration gap_timeout_floor = std::chrono::seconds(2);
  /// Upper bound of the uniform random wait added to the sender's retransmit timer.
  Duration retransmit_backoff = std::chrono::seconds(2);
  Duration reassembly_timeout = std::chrono::minutes(10);
  std::size_t max_message_bytes = codec::kDefaultMaxMessageBytes;
};

class NodeOfflineError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

struct TransferHandle {
  NodeId source = 0;
  std::uint16_t message_id = 0;
  std::uint64_t serial = 0;
};

enum class TransferState { kActive, kCompleted, kFailed };

struct TransferOutcome {
  std::uint64_t serial = 0;
  std::uint64_t tag = 0;
  NodeId dest = 0;
  FrameKind kind = FrameKind::kData;
  std::uint16_t message_id = 0;
  TransferState state = TransferState::kActive;
  SimTime started;
  SimTime finished;
  std::size_t fragments = 0;
  std::size_t retransmissions = 0;
};

/// A fully reassembled (or single-frame best-effort) message handed upward.
struct Delivery {
  FrameKind kind = FrameKind::kData;
  NodeId source = 0;
  NodeId dest = 0;
  std::uint16_t message_id = 0;
  std::vector<std::uint8_t> payload;
  SimTime at;
};

struct TransportStats {
  std::uint64_t frames_sent = 0;
  std::uint64_t data_frames_sent = 0;
  std::uint64_t retransmissions = 0;
  std::uint64_t acks_sent = 0;
  std::uint64_t nacks_sent = 0;
  std::uint64_t completed = 0;
  std::uint64_t failed = 0;
  std::uint64_t protocol_errors = 0;
  std::uint64_t stale_control = 0;
  std::uint64_t duplicates_suppressed = 0;
  std::uint64_t expired_buffers = 0;
};

/// Per-node reliable delivery over the shared medium.
///
/// Every outgoing frame passes a FIFO radio gate: a frame starts no earlier
/// than the end of the previous one and no earlier than the duty-cycle ledger
/// admits it. Messages are acknowledged once on completion; the receiver
/// reports gaps with a NACK after its gap timer expires, and the sender probes
/// with its last fragment if neither ACK nor NACK arrives.
class ReliableTransport {
 public:
  struct Hooks {
    std::function<void(const Delivery&)> deliver;
    std::function<void(const TransferOutcome&)> outcome;
  };

  ReliableTransport(NodeId self, sim::Kernel& kernel, radio::Medium& medium, sim::RngRegistry& rng,
                    TransportConfig config, Hooks hooks);
  ~ReliableTransport();
  ReliableTransport(const ReliableTransport&) = delete;
  ReliableTransport& operator=(const ReliableTransport&) = delete;

  NodeId self() const { return self_; }
  const TransportConfig& config() const { return config_; }

  /// Throws std::invalid_argument for self/broadcast destinations,
  /// codec::FrameError for oversize payloads and NodeOfflineError after shutdown().
  TransferHandle send_reliable(NodeId dest, FrameKind kind, std::span<const std::uint8_t> payload,
                               std::uint64_t tag = 0);

  /// Single unacknowledged frame. Throws codec::FrameError when the encoded
  /// payload needs more than one fragment.
  void send_best_effort(NodeId dest, FrameKind kind, std::span<const std::uint8_t> payload);

  /// Handles a frame the medium delivered to this node. Malformed or
  /// protocol-violating frames are counted and dropped.
  void on_frame_received(const codec::Frame& frame);

  /// Queues a wire frame behind the gate and returns its on-air start time.
  SimTime gate_acquire(std::vector<std::uint8_t> wire, NodeId dest, std::function<void()> on_done = {});

  /// Node failure: cancels timers and reports every active transfer as failed.
  void shutdown();
  /// Reboot after shutdown(). Message ids keep counting from where they
  /// stopped so peers do not mistake new messages for recent duplicates.
  void restart();
  bool alive() const { return alive_; }

  /// Airtime already used or reserved in the duty-cycle window ending when
  /// the gate next falls idle.
  Duration committed_airtime() const;
  Duration duty_budget() const { return medium_.ledger().budget(); }

  Duration gap_timeout(std::size_t fragment_total) const;
  Duration full_frame_airtime() const;

  std::optional<TransferState> state(const TransferHandle& h) const;
  std::size_t active_transfers() const { return outbound_.size(); }
  const TransportStats& stats() const { return stats_; }
  const codec::ReassemblySet& reassembly() const { return reassembly_; }

 private:
  struct Outbound {
    std::uint64_t serial = 0;
    std::uint64_t tag = 0;
    NodeId dest = 0;
    FrameKind kind = FrameKind::kData;
    std::uint16_t message_id = 0;
    std::vector<std::vector<std::uint8_t>> frames;
    std::vector<int> attempts;
    /// Copies of each fragment still waiting behind the radio gate.
    std::vector<int> queued;
    std::size_t pending_tx = 0;
    std::size_t retransmissions = 0;
    SimTime started;
    SimTime retransmit_deadline;
    sim::EventHandle timer;
  };
  struct Inbound {
    sim::EventHandle gap_timer;
    sim::EventHandle expiry_timer;
    int idle_nacks = 0;  // NACKs since the last new fragment
    SimTime last_nack;   // a pending NACK round keeps the buffer alive
  };

  std::uint16_t allocate_message_id();
  sim::EventHandle schedule(SimTime at, std::function<void()> fn, const char* label);
  void cancel(sim::EventHandle& h);

  void queue_fragment(Outbound& out, std::size_t index);
  void on_fragment_sent(std::uint16_t message_id, std::uint64_t serial, std::size_t index);
  void on_retransmit_timer(std::uint16_t message_id, std::uint64_t serial);
  void on_ack(const codec::Frame& frame);
  void on_nack(const codec::Frame& frame);
  void finish(std::map<std::uint16_t, Outbound>::iterator it, TransferState state);

  void on_data(const codec::Frame& frame);
  void send_control(FrameKind kind, NodeId dest, std::uint16_t message_id, std::vector<std::uint8_t> body,
                    std::function<void()> on_done = {});
  void on_gap_timer(codec::ReassemblyKey key);
  void send_nack(codec::ReassemblyKey key, const codec::ReassemblyBuffer& buf);
  void on_expiry_timer(codec::ReassemblyKey key);
  bool recently_completed(const codec::ReassemblyKey& key) const { return completed_.contains(key); }
  void remember_completed(const codec::ReassemblyKey& key);

  NodeId self_;
  sim::Kernel& kernel_;
  radio::Medium& medium_;
  sim::RngStream& backoff_rng_;
  TransportConfig config_;
  Hooks hooks_;
  bool alive_ = true;

  SimTime gate_free_at_{};
  std::uint16_t next_message_id_ = 0;
  std::uint64_t next_serial_ = 1;
  std::map<std::uint16_t, Outbound> outbound_;
  std::map<std::uint64_t, TransferState> finished_;

  codec::ReassemblySet reassembly_;
  std::map<codec::ReassemblyKey, Inbound> inbound_;
  std::set<codec::ReassemblyKey> completed_;
  std::deque<codec::ReassemblyKey> completed_order_;

  std::set<std::uint64_t> scheduled_;
  TransportStats stats_;
};

}  // namespace lorasim::transport
