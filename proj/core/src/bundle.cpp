#include "lorasim/metrics/bundle.hpp"

#include <stdexcept>

namespace lorasim::metrics {

namespace {

std::uint64_t splitmix(std::uint64_t& x) {
  std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

void put_be64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int shift = 56; shift >= 0; shift -= 8) out.push_back(static_cast<std::uint8_t>(v >> shift));
}

std::uint64_t get_be64(std::span<const std::uint8_t> in) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v = (v << 8) | in[i];
  return v;
}

std::vector<std::uint8_t> synthetic_blob(std::uint64_t seed, std::size_t n) {
  std::vector<std::uint8_t> blob(n);
  std::uint64_t state = seed;
  std::uint64_t word = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (i % 8 == 0) word = splitmix(state);
    blob[i] = static_cast<std::uint8_t>(word >> (8 * (i % 8)));
  }
  return blob;
}

constexpr std::uint8_t kMagic[3] = {'G', 'B', '1'};
constexpr std::size_t kBundleHeader = 3 + 24;

}  // namespace

std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

Version derive_version(Version base, std::span<const std::uint8_t> blob) {
  std::vector<std::uint8_t> buf;
  put_be64(buf, base);
  put_be64(buf, fnv1a64(blob));
  const Version v = fnv1a64(buf);
  return v == kAnyVersion ? 1 : v;
}

Bundle make_bundle(NodeId node, Version from, Version to, std::size_t payload_size) {
  if (from == to) throw std::invalid_argument("bundle must change the version");
  std::vector<std::uint8_t> seed_bytes;
  put_be64(seed_bytes, from);
  put_be64(seed_bytes, to);
  seed_bytes.push_back(node);
  Bundle b;
  b.base_version = from;
  b.new_version = to;
  b.blob = synthetic_blob(fnv1a64(seed_bytes), payload_size);
  b.id = fnv1a64(b.blob);
  return b;
}

Bundle make_snapshot(NodeId node, Version to, std::size_t payload_size) {
  return make_bundle(node, kAnyVersion, to, payload_size);
}

std::vector<std::uint8_t> encode_bundle(const Bundle& b) {
  std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
  out.reserve(kBundleHeader + b.blob.size());
  put_be64(out, b.base_version);
  put_be64(out, b.new_version);
  put_be64(out, b.id);
  out.insert(out.end(), b.blob.begin(), b.blob.end());
  return out;
}

Bundle decode_bundle(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kBundleHeader || !std::equal(std::begin(kMagic), std::end(kMagic), bytes.begin()))
    throw std::invalid_argument("not a bundle");
  Bundle b;
  b.base_version = get_be64(bytes.subspan(3));
  b.new_version = get_be64(bytes.subspan(11));
  b.id = get_be64(bytes.subspan(19));
  b.blob.assign(bytes.begin() + kBundleHeader, bytes.end());
  if (fnv1a64(b.blob) != b.id) throw std::invalid_argument("bundle content does not match its id");
  if (b.base_version == b.new_version) throw std::invalid_argument("bundle does not change the version");
  return b;
}

const char* to_string(ApplyResult r) {
  switch (r) {
    case ApplyResult::kApplied: return "applied";
    case ApplyResult::kAlreadyApplied: return "already-applied";
    case ApplyResult::kRejected: return "rejected";
  }
  return "?";
}

ApplyResult NodeFileState::apply(const Bundle& b) {
  if (current_ == b.new_version) return ApplyResult::kAlreadyApplied;
  if (!b.snapshot() && current_ != b.base_version) return ApplyResult::kRejected;
  current_ = b.new_version;
  return ApplyResult::kApplied;
}

SyncAgent::SyncAgent(NodeId self, std::vector<NodeId> nodes, SyncConfig config, sim::Kernel& kernel,
                     transport::ReliableTransport& transport)
    : self_(self), nodes_(std::move(nodes)), config_(config), kernel_(kernel), transport_(transport), state_(self) {}

SyncAgent::~SyncAgent() {
  kernel_.cancel(timer_);
  kernel_.cancel(pacing_timer_);
}

void SyncAgent::start() {
  active_ = true;
  if (config_.enabled && is_publisher()) schedule_publish();
}

void SyncAgent::stop() {
  active_ = false;
  kernel_.cancel(timer_);
  kernel_.cancel(pacing_timer_);
  timer_ = {};
  pacing_timer_ = {};
  queue_.clear();
  in_flight_.reset();
}

void SyncAgent::schedule_publish() {
  timer_ = kernel_.schedule(kernel_.now() + config_.interval, [this] {
    timer_ = {};
    publish();
    schedule_publish();
  }, self_, "sync-publish");
}

void SyncAgent::publish() {
  if (!active_ || kernel_.now() > config_.last_publish) return;
  const Version from = state_.current_version();
  // Content first, then the version it yields.
  std::vector<std::uint8_t> seed;
  for (int i = 0; i < 8; ++i) seed.push_back(static_cast<std::uint8_t>(++generation_ >> (8 * i)));
  const Version to = derive_version(from, seed);
  auto bundle = make_bundle(self_, from, to, config_.bundle_bytes);
  if (state_.apply(bundle) != ApplyResult::kApplied) throw std::logic_error("publisher rejected its own bundle");
  ++stats_.published;
  for (const auto peer : nodes_) {
    if (peer != self_) send_to(peer, bundle);
  }
}

void SyncAgent::send_to(NodeId peer, const Bundle& b) {
  // A newer delta replaces a queued one for the same peer and covers both
  // commits, so it starts from the older bundle's base.
  if (!b.snapshot()) {
    for (auto& [p, queued] : queue_) {
      if (p != peer || queued.snapshot()) continue;
      const Version base = queued.base_version;
      queued = b;
      queued.base_version = base;
      ++stats_.superseded;
      pump();
      return;
    }
  }
  queue_.emplace_back(peer, b);
  pump();
}

void SyncAgent::pump() {
  if (!active_ || in_flight_ || queue_.empty() || pacing_timer_.valid() || !transport_.alive()) return;
  const auto& [peer, bundle] = queue_.front();
  const auto bytes = encode_bundle(bundle);
  const auto cost = transport_.full_frame_airtime() * static_cast<std::int64_t>(codec::fragment_count(bytes.size()));
  const auto limit = Duration(static_cast<std::int64_t>(static_cast<double>(transport_.duty_budget().count()) *
                                                        config_.airtime_share));
  if (transport_.committed_airtime() + cost > limit && cost <= limit) {
    ++stats_.paced;
    pacing_timer_ = kernel_.schedule(kernel_.now() + config_.pacing_retry, [this] {
      pacing_timer_ = {};
      pump();
    }, self_, "sync-pacing");
    return;
  }
  const auto h = transport_.send_reliable(peer, codec::FrameKind::kBundleData, bytes);
  in_flight_ = h.serial;
  ++stats_.bundles_sent;
  if (bundle.snapshot()) ++stats_.snapshots_sent;
  queue_.pop_front();
}

void SyncAgent::on_delivery(const transport::Delivery& d) {
  if (!active_) return;
  if (d.kind == codec::FrameKind::kBundleData) {
    Bundle b;
    try {
      b = decode_bundle(d.payload);
    } catch (const std::invalid_argument&) {
      return;
    }
    switch (state_.apply(b)) {
      case ApplyResult::kApplied: ++stats_.applied; break;
      case ApplyResult::kAlreadyApplied: ++stats_.already_applied; break;
      case ApplyResult::kRejected: {
        ++stats_.rejected;
        const std::string req = "RESYNC " + std::to_string(state_.current_version());
        const std::vector<std::uint8_t> bytes(req.begin(), req.end());
        transport_.send_reliable(d.source, codec::FrameKind::kData, bytes);
        break;
      }
    }
    return;
  }
  if (d.kind == codec::FrameKind::kData && is_publisher()) {
    const std::string text(d.payload.begin(), d.payload.end());
    if (text.rfind("RESYNC ", 0) != 0) return;
    ++stats_.resync_requests;
    send_to(d.source, make_snapshot(self_, state_.current_version(), config_.snapshot_bytes));
  }
}

void SyncAgent::on_outcome(const transport::TransferOutcome& o) {
  if (!in_flight_ || *in_flight_ != o.serial) return;
  in_flight_.reset();
  if (o.state == transport::TransferState::kFailed) ++stats_.failed_transfers;
  pump();
}

}  // namespace lorasim::metrics
