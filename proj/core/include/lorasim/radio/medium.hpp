#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <span>
#include <variant>
#include <vector>

#include "lorasim/radio/duty_cycle.hpp"
#include "lorasim/radio/params.hpp"
#include "lorasim/radio/propagation.hpp"
#include "lorasim/sim/kernel.hpp"
#include "lorasim/sim/rng.hpp"

namespace lorasim::radio {

inline constexpr std::size_t kMaxFrameBytes = 252;

struct ChannelConfig {
  PathLossModel path_loss;
  bool capture_enabled = true;
  double capture_margin_db = 6.0;
  /// Independent per-(frame, receiver) loss probability applied after collision resolution.
  double frame_loss = 0.0;
  Duration duty_window = std::chrono::hours(1);
  std::int64_t duty_budget_num = 1;
  std::int64_t duty_budget_den = 100;
};

struct TransmissionRecord {
  std::uint64_t id = 0;
  NodeId sender = 0;
  NodeId dest = kBroadcast;
  std::size_t bytes = 0;
  SimTime start;
  SimTime end;
  int spreading_factor = 7;
  std::uint64_t frequency_hz = 0;
  std::map<NodeId, double> rssi_dbm;
  std::vector<NodeId> delivered_to;
  /// Lost to overlap at one or more addressed receivers.
  bool collided = false;
  bool cancelled = false;
  /// Sender died mid-frame: still occupies the channel, never decodes.
  bool truncated = false;
  std::vector<std::uint8_t> wire;
};

struct Accepted {
  SimTime start;
  SimTime end;
  std::uint64_t record_id = 0;
};
struct Deferred {
  SimTime next_allowed;
};
using TransmitResult = std::variant<Accepted, Deferred>;

/// One overlapping signal as seen by a particular receiver.
struct Reception {
  std::uint64_t record_id = 0;
  double rssi_dbm = 0.0;
};

/// Destructive-collision rule with optional capture. A lone signal is delivered
/// iff it clears sensitivity; among overlapping signals only one that beats
/// every other by capture_margin_db survives. Result is sorted by record id.
std::vector<std::uint64_t> resolve_reception(std::span<const Reception> overlapping, double sensitivity_dbm,
                                             bool capture_enabled, double capture_margin_db);

struct MediumStats {
  std::uint64_t transmissions = 0;
  std::uint64_t collided = 0;
  std::uint64_t half_duplex_misses = 0;
  std::uint64_t below_sensitivity = 0;
  std::uint64_t random_losses = 0;
  std::uint64_t scripted_drops = 0;
};

/// The shared channel: airtime, duty-cycle admission, reception and collisions.
class Medium {
 public:
  using ReceiveSink = std::function<void(NodeId rx, const TransmissionRecord&)>;
  using ListenPredicate = std::function<bool(NodeId)>;
  /// Returns true to drop the frame at that receiver (scripted-loss tests).
  using DropFilter = std::function<bool(const TransmissionRecord&, NodeId rx)>;

  Medium(sim::Kernel& kernel, sim::RngRegistry& rng, RadioParams params, ChannelConfig channel,
         std::vector<NodePosition> nodes);

  const RadioParams& params() const { return params_; }
  const ChannelConfig& channel() const { return channel_; }
  const LinkTable& links() const { return links_; }
  DutyCycleLedger& ledger() { return ledger_; }
  const DutyCycleLedger& ledger() const { return ledger_; }

  void set_receive_sink(ReceiveSink sink) { sink_ = std::move(sink); }
  void set_listen_predicate(ListenPredicate p) { listening_ = std::move(p); }
  void set_drop_filter(DropFilter f) { drop_ = std::move(f); }

  /// Admission check only for a frame of `frame_bytes`; nothing is recorded on deferral.
  TransmitResult try_transmit(NodeId sender, std::size_t frame_bytes, SimTime t);
  /// Full transmit. On acceptance a record is created and its reception is
  /// resolved at the frame's end time. Throws std::invalid_argument if the
  /// frame exceeds 252 bytes and std::logic_error if the sender is still on air.
  TransmitResult try_transmit(NodeId sender, NodeId dest, std::vector<std::uint8_t> wire, SimTime t);

  /// Withdraws reservations of `sender` starting at or after t (node failure).
  /// A frame already on air at t is truncated.
  void cancel_from(NodeId sender, SimTime t);

  /// Time at which `sender` finishes its last reserved transmission.
  SimTime busy_until(NodeId sender) const;

  /// Every non-cancelled transmission, in creation order.
  std::vector<const TransmissionRecord*> log() const;
  const MediumStats& stats() const { return stats_; }
  std::vector<NodeId> nodes() const;

 private:
  TransmitResult admit(NodeId sender, std::size_t bytes, SimTime t) const;
  void resolve(std::uint64_t record_id);
  TransmissionRecord& record(std::uint64_t id) { return records_[id - 1]; }

  sim::Kernel& kernel_;
  sim::RngStream& loss_rng_;
  RadioParams params_;
  ChannelConfig channel_;
  std::vector<NodePosition> positions_;
  LinkTable links_;
  DutyCycleLedger ledger_;
  std::deque<TransmissionRecord> records_;
  /// (start, id) of records that have not ended long ago, ascending.
  std::vector<std::pair<SimTime, std::uint64_t>> recent_;
  std::map<NodeId, SimTime> busy_until_;
  std::map<std::uint64_t, sim::EventHandle> end_events_;
  ReceiveSink sink_;
  ListenPredicate listening_;
  DropFilter drop_;
  MediumStats stats_;
};

}  // namespace lorasim::radio
