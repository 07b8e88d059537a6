#include "lorasim/transport/reliable.hpp"

#include <algorithm>
#include <memory>
#include <string>

#include "lorasim/codec/base64.hpp"

namespace lorasim::transport {
namespace {

constexpr std::size_t kMaxNackIndices = codec::kMaxBodyBytes / 2;
constexpr std::size_t kCompletedMemory = 4096;
constexpr int kMaxGapBackoffShift = 5;

}  // namespace

ReliableTransport::ReliableTransport(NodeId self, sim::Kernel& kernel, radio::Medium& medium, sim::RngRegistry& rng,
                                     TransportConfig config, Hooks hooks)
    : self_(self),
      kernel_(kernel),
      medium_(medium),
      backoff_rng_(rng.register_stream(sim::streams::kBackoff)),
      config_(config),
      hooks_(std::move(hooks)) {
  gate_free_at_ = std::max(kernel_.now(), medium_.busy_until(self_));
}

ReliableTransport::~ReliableTransport() {
  for (const auto seq : scheduled_) kernel_.cancel(sim::EventHandle{seq});
}

sim::EventHandle ReliableTransport::schedule(SimTime at, std::function<void()> fn, const char* label) {
  // The sequence is only known after scheduling; the wrapper looks it up through a shared slot.
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

void ReliableTransport::cancel(sim::EventHandle& h) {
  if (h.valid()) {
    kernel_.cancel(h);
    scheduled_.erase(h.sequence);
  }
  h = {};
}

Duration ReliableTransport::full_frame_airtime() const {
  return radio::airtime(medium_.params(), codec::kMaxFrameBytes);
}

Duration ReliableTransport::gap_timeout(std::size_t fragment_total) const {
  const Duration scaled = 2 * full_frame_airtime() * static_cast<std::int64_t>(fragment_total);
  // Large messages still NACK well before an idle buffer expires.
  return std::clamp(scaled, config_.gap_timeout_floor, std::max(config_.gap_timeout_floor, config_.reassembly_timeout / 2));
}

Duration ReliableTransport::committed_airtime() const {
  return medium_.ledger().used_in_window(self_, std::max(kernel_.now(), gate_free_at_));
}

std::uint16_t ReliableTransport::allocate_message_id() {
  for (int i = 0; i < 0x10000; ++i) {
    const std::uint16_t id = next_message_id_++;
    if (!outbound_.contains(id)) return id;
  }
  throw std::runtime_error("all 65536 message ids are in flight");
}

// --- radio gate -----------------------------------------------------------

SimTime ReliableTransport::gate_acquire(std::vector<std::uint8_t> wire, NodeId dest, std::function<void()> on_done) {
  SimTime candidate = std::max({kernel_.now(), gate_free_at_, medium_.busy_until(self_)});
  for (;;) {
    const auto probe = medium_.try_transmit(self_, wire.size(), candidate);
    if (const auto* deferred = std::get_if<radio::Deferred>(&probe)) {
      if (deferred->next_allowed == SimTime::max())
        throw std::runtime_error("frame airtime exceeds the whole duty-cycle budget");
      candidate = deferred->next_allowed;
      continue;
    }
    break;
  }
  const auto result = medium_.try_transmit(self_, dest, std::move(wire), candidate);
  const auto& accepted = std::get<radio::Accepted>(result);
  gate_free_at_ = accepted.end;
  ++stats_.frames_sent;
  if (on_done) schedule(accepted.end, std::move(on_done), "tx-done");
  return accepted.start;
}

// --- sender ---------------------------------------------------------------

TransferHandle ReliableTransport::send_reliable(NodeId dest, FrameKind kind, std::span<const std::uint8_t> payload,
                                                std::uint64_t tag) {
  if (!alive_) throw NodeOfflineError("node " + std::to_string(self_) + " is offline");
  if (dest == self_ || dest == kBroadcast)
    throw std::invalid_argument("reliable transfers need a unicast destination other than the sender");
  if (!codec::is_data_kind(kind)) throw std::invalid_argument("reliable transfers carry data kinds only");

  const std::uint16_t id = allocate_message_id();
  auto frames = codec::encode_message(kind, self_, dest, id, payload, config_.max_message_bytes);

  Outbound out;
  out.serial = next_serial_++;
  out.tag = tag;
  out.dest = dest;
  out.kind = kind;
  out.message_id = id;
  out.started = kernel_.now();
  out.attempts.assign(frames.size(), 0);
  out.queued.assign(frames.size(), 0);
  out.frames.reserve(frames.size());
  for (const auto& f : frames) out.frames.push_back(codec::encode_frame(f));

  auto& stored = outbound_.emplace(id, std::move(out)).first->second;
  for (std::size_t i = 0; i < stored.frames.size(); ++i) queue_fragment(stored, i);
  return TransferHandle{self_, id, stored.serial};
}

void ReliableTransport::queue_fragment(Outbound& out, std::size_t index) {
  ++out.attempts[index];
  ++out.queued[index];
  ++out.pending_tx;
  ++stats_.data_frames_sent;
  if (out.attempts[index] > 1) {
    ++out.retransmissions;
    ++stats_.retransmissions;
  }
  const std::uint16_t id = out.message_id;
  const std::uint64_t serial = out.serial;
  gate_acquire(out.frames[index], out.dest, [this, id, serial, index] { on_fragment_sent(id, serial, index); });
}

void ReliableTransport::on_fragment_sent(std::uint16_t message_id, std::uint64_t serial, std::size_t index) {
  auto it = outbound_.find(message_id);
  if (it == outbound_.end() || it->second.serial != serial) return;
  auto& out = it->second;
  if (out.queued[index] > 0) --out.queued[index];
  if (out.pending_tx > 0) --out.pending_tx;
  if (out.pending_tx > 0) return;

  const auto jitter = Duration(static_cast<std::int64_t>(
      backoff_rng_.uniform() * static_cast<double>(config_.retransmit_backoff.count())));
  out.retransmit_deadline = kernel_.now() + gap_timeout(out.frames.size()) + full_frame_airtime() + jitter;
  cancel(out.timer);
  out.timer = schedule(out.retransmit_deadline, [this, message_id, serial] { on_retransmit_timer(message_id, serial); },
                       "retransmit-timer");
}

void ReliableTransport::on_retransmit_timer(std::uint16_t message_id, std::uint64_t serial) {
  auto it = outbound_.find(message_id);
  if (it == outbound_.end() || it->second.serial != serial) return;
  auto& out = it->second;
  out.timer = {};
  // No ACK or NACK: probe with the last fragment so the receiver either
  // re-acknowledges or learns the message exists and NACKs the rest.
  const std::size_t probe = out.frames.size() - 1;
  if (out.attempts[probe] >= config_.max_retries + 1) {
    finish(it, TransferState::kFailed);
    return;
  }
  queue_fragment(out, probe);
}

void ReliableTransport::on_ack(const codec::Frame& frame) {
  auto it = outbound_.find(frame.header.message_id);
  if (it == outbound_.end() || it->second.dest != frame.header.source) {
    ++stats_.stale_control;
    return;
  }
  finish(it, TransferState::kCompleted);
}

void ReliableTransport::on_nack(const codec::Frame& frame) {
  auto it = outbound_.find(frame.header.message_id);
  if (it == outbound_.end() || it->second.dest != frame.header.source) {
    ++stats_.stale_control;
    return;
  }
  auto& out = it->second;
  std::vector<std::uint16_t> missing;
  try {
    missing = codec::decode_nack_body(frame.body);
  } catch (const codec::FrameError&) {
    ++stats_.protocol_errors;
    return;
  }
  std::sort(missing.begin(), missing.end());
  missing.erase(std::unique(missing.begin(), missing.end()), missing.end());
  // Fragments still queued behind the gate are already on their way.
  std::erase_if(missing, [&](std::uint16_t i) { return i >= out.frames.size() || out.queued[i] > 0; });
  if (missing.empty()) return;

  cancel(out.timer);
  for (const auto idx : missing) {
    if (out.attempts[idx] >= config_.max_retries + 1) {
      finish(it, TransferState::kFailed);
      return;
    }
  }
  for (const auto idx : missing) queue_fragment(out, idx);
}

void ReliableTransport::finish(std::map<std::uint16_t, Outbound>::iterator it, TransferState state) {
  auto& out = it->second;
  cancel(out.timer);
  TransferOutcome outcome;
  outcome.serial = out.serial;
  outcome.tag = out.tag;
  outcome.dest = out.dest;
  outcome.kind = out.kind;
  outcome.message_id = out.message_id;
  outcome.state = state;
  outcome.started = out.started;
  outcome.finished = kernel_.now();
  outcome.fragments = out.frames.size();
  outcome.retransmissions = out.retransmissions;
  finished_[out.serial] = state;
  outbound_.erase(it);
  if (state == TransferState::kCompleted) ++stats_.completed;
  else ++stats_.failed;
  if (hooks_.outcome) hooks_.outcome(outcome);
}

std::optional<TransferState> ReliableTransport::state(const TransferHandle& h) const {
  if (auto it = finished_.find(h.serial); it != finished_.end()) return it->second;
  if (auto it = outbound_.find(h.message_id); it != outbound_.end() && it->second.serial == h.serial)
    return TransferState::kActive;
  return std::nullopt;
}

void ReliableTransport::send_best_effort(NodeId dest, FrameKind kind, std::span<const std::uint8_t> payload) {
  if (!alive_) throw NodeOfflineError("node " + std::to_string(self_) + " is offline");
  if (codec::fragment_count(payload.size()) > 1) {
    throw codec::FrameError(codec::FrameError::Code::kOversize,
                            "best-effort payload of " + std::to_string(payload.size()) +
                                " bytes needs fragmentation");
  }
  const auto frames = codec::encode_message(kind, self_, dest, allocate_message_id(), payload);
  gate_acquire(codec::encode_frame(frames.front()), dest);
}

// --- receiver -------------------------------------------------------------

void ReliableTransport::on_frame_received(const codec::Frame& frame) {
  if (!alive_) return;
  const auto& h = frame.header;
  if (h.dest != self_ && h.dest != kBroadcast) return;
  switch (h.kind) {
    case FrameKind::kAck: on_ack(frame); return;
    case FrameKind::kNack: on_nack(frame); return;
    case FrameKind::kHeartbeat: {
      if (h.fragment_total != 1) {
        ++stats_.protocol_errors;
        return;
      }
      auto payload = codec::base64_decode(std::string(frame.body.begin(), frame.body.end()));
      if (!payload) {
        ++stats_.protocol_errors;
        return;
      }
      if (hooks_.deliver) hooks_.deliver(Delivery{h.kind, h.source, h.dest, h.message_id, std::move(*payload), kernel_.now()});
      return;
    }
    default: on_data(frame); return;
  }
}

void ReliableTransport::remember_completed(const codec::ReassemblyKey& key) {
  // Count-bounded rather than timed: a throttled sender may retransmit long
  // after completion, and ids only repeat after 65536 messages per source.
  if (!completed_.insert(key).second) return;
  completed_order_.push_back(key);
  if (completed_order_.size() > kCompletedMemory) {
    completed_.erase(completed_order_.front());
    completed_order_.pop_front();
  }
}

void ReliableTransport::on_data(const codec::Frame& frame) {
  const auto& h = frame.header;
  if (h.dest == kBroadcast) {
    // Broadcast data is best-effort: only single-frame messages are meaningful.
    if (h.fragment_total != 1) {
      ++stats_.protocol_errors;
      return;
    }
    auto payload = codec::base64_decode(std::string(frame.body.begin(), frame.body.end()));
    if (!payload) {
      ++stats_.protocol_errors;
      return;
    }
    if (hooks_.deliver) hooks_.deliver(Delivery{h.kind, h.source, h.dest, h.message_id, std::move(*payload), kernel_.now()});
    return;
  }

  const codec::ReassemblyKey key{h.source, h.message_id};
  if (recently_completed(key)) {
    // The ACK was lost; the sender is probing or retransmitting.
    ++stats_.duplicates_suppressed;
    send_control(FrameKind::kAck, h.source, h.message_id, {});
    return;
  }

  codec::AcceptStatus status;
  try {
    status = reassembly_.accept_fragment(frame, kernel_.now());
  } catch (const codec::ProtocolError&) {
    ++stats_.protocol_errors;
    return;
  }

  if (auto* done = std::get_if<codec::Complete>(&status)) {
    if (auto it = inbound_.find(key); it != inbound_.end()) {
      cancel(it->second.gap_timer);
      cancel(it->second.expiry_timer);
      inbound_.erase(it);
    }
    remember_completed(key);
    send_control(FrameKind::kAck, h.source, h.message_id, {});
    if (hooks_.deliver) hooks_.deliver(Delivery{h.kind, h.source, h.dest, h.message_id, std::move(done->payload), kernel_.now()});
    return;
  }
  if (std::holds_alternative<codec::Duplicate>(status)) {
    ++stats_.duplicates_suppressed;
    // A repeated last fragment is the sender's probe: answer with the gaps.
    const auto* buf = reassembly_.find(key);
    if (buf != nullptr && h.fragment_index + 1u == h.fragment_total && inbound_.contains(key)) send_nack(key, *buf);
    return;
  }

  auto& in = inbound_[key];
  in.idle_nacks = 0;
  cancel(in.gap_timer);
  in.gap_timer = schedule(kernel_.now() + gap_timeout(h.fragment_total), [this, key] { on_gap_timer(key); }, "gap-timer");
  if (!in.expiry_timer.valid()) {
    in.expiry_timer =
        schedule(kernel_.now() + config_.reassembly_timeout, [this, key] { on_expiry_timer(key); }, "reassembly-expiry");
  }
}

void ReliableTransport::on_gap_timer(codec::ReassemblyKey key) {
  auto it = inbound_.find(key);
  const auto* buf = reassembly_.find(key);
  if (it == inbound_.end() || buf == nullptr) return;
  auto& in = it->second;
  in.gap_timer = {};
  if (in.idle_nacks >= config_.max_retries + 1) return;  // answer probes until expiry
  send_nack(key, *buf);
}

void ReliableTransport::send_nack(codec::ReassemblyKey key, const codec::ReassemblyBuffer& buf) {
  auto missing = buf.missing();
  if (missing.size() > kMaxNackIndices) missing.resize(kMaxNackIndices);
  const std::size_t total = buf.expected_total;
  send_control(FrameKind::kNack, key.source, key.message_id, codec::encode_nack_body(missing), [this, key, total] {
    auto again = inbound_.find(key);
    if (again == inbound_.end()) return;
    again->second.last_nack = kernel_.now();
    // Back off while no new fragment arrives; the sender may be out of duty budget.
    const int shift = std::min(again->second.idle_nacks++, kMaxGapBackoffShift);
    cancel(again->second.gap_timer);
    again->second.gap_timer =
        schedule(kernel_.now() + std::min(gap_timeout(total) * (std::int64_t{1} << shift), config_.reassembly_timeout / 2),
                 [this, key] { on_gap_timer(key); }, "gap-timer");
  });
}

void ReliableTransport::on_expiry_timer(codec::ReassemblyKey key) {
  auto it = inbound_.find(key);
  if (it == inbound_.end()) return;
  it->second.expiry_timer = {};
  const auto* buf = reassembly_.find(key);
  if (buf == nullptr) {
    inbound_.erase(it);
    return;
  }
  const SimTime deadline = std::max(buf->last_activity, it->second.last_nack) + config_.reassembly_timeout;
  if (deadline > kernel_.now()) {
    it->second.expiry_timer = schedule(deadline, [this, key] { on_expiry_timer(key); }, "reassembly-expiry");
    return;
  }
  cancel(it->second.gap_timer);
  reassembly_.erase(key);
  inbound_.erase(it);
  ++stats_.expired_buffers;
}

void ReliableTransport::send_control(FrameKind kind, NodeId dest, std::uint16_t message_id, std::vector<std::uint8_t> body,
                                     std::function<void()> on_done) {
  codec::Frame f;
  f.header.kind = kind;
  f.header.source = self_;
  f.header.dest = dest;
  f.header.message_id = message_id;
  f.body = std::move(body);
  if (kind == FrameKind::kAck) ++stats_.acks_sent;
  else ++stats_.nacks_sent;
  gate_acquire(codec::encode_frame(f), dest, std::move(on_done));
}

void ReliableTransport::shutdown() {
  if (!alive_) return;
  alive_ = false;
  for (const auto seq : scheduled_) kernel_.cancel(sim::EventHandle{seq});
  scheduled_.clear();
  medium_.cancel_from(self_, kernel_.now());
  inbound_.clear();
  while (!outbound_.empty()) {
    auto it = outbound_.begin();
    it->second.timer = {};
    finish(it, TransferState::kFailed);
  }
}

void ReliableTransport::restart() {
  if (alive_) return;
  alive_ = true;
  gate_free_at_ = kernel_.now();
  reassembly_ = codec::ReassemblySet{};
  completed_.clear();
  completed_order_.clear();
}

}  // namespace lorasim::transport
