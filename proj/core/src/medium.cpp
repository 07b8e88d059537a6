#include "lorasim/radio/medium.hpp"

#include <algorithm>
#include <limits>
#include <utility>
#include <stdexcept>
#include <string>

namespace lorasim::radio {
namespace {

bool overlaps(const TransmissionRecord& a, const TransmissionRecord& b) {
  return a.start < b.end && b.start < a.end;
}

constexpr Duration kRecentHorizon = std::chrono::seconds(60);

}  // namespace

std::vector<std::uint64_t> resolve_reception(std::span<const Reception> overlapping, double sensitivity_dbm,
                                             bool capture_enabled, double capture_margin_db) {
  if (overlapping.empty()) return {};
  if (overlapping.size() == 1) {
    if (overlapping.front().rssi_dbm >= sensitivity_dbm) return {overlapping.front().record_id};
    return {};
  }
  if (!capture_enabled) return {};
  for (const auto& candidate : overlapping) {
    if (candidate.rssi_dbm < sensitivity_dbm) continue;
    const bool dominates = std::all_of(overlapping.begin(), overlapping.end(), [&](const Reception& other) {
      return other.record_id == candidate.record_id || candidate.rssi_dbm >= other.rssi_dbm + capture_margin_db;
    });
    if (dominates) return {candidate.record_id};
  }
  return {};
}

Medium::Medium(sim::Kernel& kernel, sim::RngRegistry& rng, RadioParams params, ChannelConfig channel,
               std::vector<NodePosition> nodes)
    : kernel_(kernel),
      loss_rng_(rng.register_stream(sim::streams::kLoss)),
      params_(params),
      channel_(channel),
      positions_(std::move(nodes)),
      links_(positions_, channel.path_loss, &rng.register_stream(sim::streams::kShadowing)),
      ledger_(channel.duty_window, channel.duty_budget_num, channel.duty_budget_den) {
  params_.validate();
  std::sort(positions_.begin(), positions_.end(), [](const auto& a, const auto& b) { return a.node < b.node; });
}

std::vector<NodeId> Medium::nodes() const {
  std::vector<NodeId> ids;
  for (const auto& p : positions_) ids.push_back(p.node);
  return ids;
}

SimTime Medium::busy_until(NodeId sender) const {
  auto it = busy_until_.find(sender);
  return it == busy_until_.end() ? SimTime{} : it->second;
}

TransmitResult Medium::admit(NodeId sender, std::size_t bytes, SimTime t) const {
  if (bytes > kMaxFrameBytes)
    throw std::invalid_argument("frame of " + std::to_string(bytes) + " bytes exceeds the 252-byte frame cap");
  const Duration toa = airtime(params_, bytes);
  if (ledger_.admits(sender, t, toa)) return Accepted{t, t + toa, 0};
  return Deferred{ledger_.next_allowed(sender, t, toa)};
}

TransmitResult Medium::try_transmit(NodeId sender, std::size_t frame_bytes, SimTime t) {
  return admit(sender, frame_bytes, t);
}

TransmitResult Medium::try_transmit(NodeId sender, NodeId dest, std::vector<std::uint8_t> wire, SimTime t) {
  if (t < kernel_.now()) throw std::invalid_argument("transmission start in the past");
  if (t < busy_until(sender))
    throw std::logic_error("node " + std::to_string(sender) + " is already transmitting");
  auto result = admit(sender, wire.size(), t);
  if (std::holds_alternative<Deferred>(result)) return result;

  auto& accepted = std::get<Accepted>(result);
  TransmissionRecord rec;
  rec.id = records_.size() + 1;
  rec.sender = sender;
  rec.dest = dest;
  rec.bytes = wire.size();
  rec.start = accepted.start;
  rec.end = accepted.end;
  rec.spreading_factor = params_.spreading_factor;
  rec.frequency_hz = params_.frequency_hz;
  rec.wire = std::move(wire);
  for (const auto& p : positions_) {
    if (p.node != sender) rec.rssi_dbm[p.node] = links_.rssi(sender, p.node, params_.tx_power_dbm);
  }
  accepted.record_id = rec.id;

  ledger_.prune(sender, t);
  ledger_.record(sender, rec.start, rec.end - rec.start);
  busy_until_[sender] = rec.end;
  const auto slot = std::upper_bound(recent_.begin(), recent_.end(), std::make_pair(rec.start, rec.id));
  recent_.insert(slot, {rec.start, rec.id});
  const std::uint64_t id = rec.id;
  records_.push_back(std::move(rec));
  ++stats_.transmissions;
  end_events_[id] = kernel_.schedule(accepted.end, [this, id] { resolve(id); }, sender, "rx-resolve");
  return result;
}

void Medium::cancel_from(NodeId sender, SimTime t) {
  SimTime last_kept{};
  for (const auto& [_, id] : recent_) {
    auto& rec = record(id);
    if (rec.sender != sender || rec.cancelled) continue;
    if (rec.start >= t) {
      rec.cancelled = true;
      --stats_.transmissions;
      if (auto it = end_events_.find(id); it != end_events_.end()) {
        kernel_.cancel(it->second);
        end_events_.erase(it);
      }
    } else {
      if (rec.end > t) rec.truncated = true;
      last_kept = std::max(last_kept, rec.end);
    }
  }
  ledger_.cancel_from(sender, t);
  busy_until_[sender] = last_kept;
}

void Medium::resolve(std::uint64_t record_id) {
  end_events_.erase(record_id);
  const SimTime now = kernel_.now();
  // Only records that already started can have ended.
  const auto started = std::upper_bound(recent_.begin(), recent_.end(), std::make_pair(now, std::numeric_limits<std::uint64_t>::max()));
  const auto kept = std::remove_if(recent_.begin(), started, [&](const auto& entry) {
    const auto& r = record(entry.second);
    return r.cancelled || r.end + kRecentHorizon < now;
  });
  recent_.erase(kept, started);

  auto& rec = record(record_id);
  const double sensitivity = sensitivity_dbm(rec.spreading_factor, params_.bandwidth_hz);

  for (const auto& pos : positions_) {
    const NodeId rx = pos.node;
    if (rx == rec.sender) continue;
    if (listening_ && !listening_(rx)) continue;
    const bool addressed = rec.dest == kBroadcast || rec.dest == rx;

    bool rx_busy = false;
    std::vector<Reception> signals{{rec.id, rec.rssi_dbm.at(rx)}};
    const auto before_end = std::lower_bound(recent_.begin(), recent_.end(), std::make_pair(rec.end, std::uint64_t{0}));
    for (auto it = recent_.begin(); it != before_end; ++it) {
      const auto id = it->second;
      if (id == rec.id) continue;
      const auto& other = record(id);
      if (other.cancelled || !overlaps(rec, other)) continue;
      if (other.sender == rx) {
        rx_busy = true;
        break;
      }
      if (other.frequency_hz != rec.frequency_hz || other.spreading_factor != rec.spreading_factor) continue;
      signals.push_back({other.id, other.rssi_dbm.at(rx)});
    }
    if (rx_busy) {
      ++stats_.half_duplex_misses;
      continue;
    }

    const auto winners = resolve_reception(signals, sensitivity, channel_.capture_enabled, channel_.capture_margin_db);
    const bool delivered = std::find(winners.begin(), winners.end(), rec.id) != winners.end();
    if (delivered && rec.truncated) continue;
    if (!delivered) {
      if (signals.size() > 1) {
        if (addressed) rec.collided = true;
      } else {
        ++stats_.below_sensitivity;
      }
      continue;
    }
    if (channel_.frame_loss > 0.0 && loss_rng_.uniform() < channel_.frame_loss) {
      ++stats_.random_losses;
      continue;
    }
    if (drop_ && drop_(rec, rx)) {
      ++stats_.scripted_drops;
      continue;
    }
    rec.delivered_to.push_back(rx);
    if (sink_) sink_(rx, rec);
  }
  if (rec.collided) ++stats_.collided;
  rec.wire.clear();
  rec.wire.shrink_to_fit();
}

std::vector<const TransmissionRecord*> Medium::log() const {
  std::vector<const TransmissionRecord*> out;
  out.reserve(records_.size());
  for (const auto& r : records_) {
    if (!r.cancelled) out.push_back(&r);
  }
  return out;
}

}  // namespace lorasim::radio
