#include <gtest/gtest.h>

#include <map>
#include <memory>

#include "lorasim/codec/frame.hpp"
#include "lorasim/metrics/bundle.hpp"
#include "lorasim/radio/medium.hpp"
#include "lorasim/transport/reliable.hpp"

namespace lorasim::metrics {
namespace {

TEST(Bundle, EncodeDecodeRoundTrip) {
  const auto b = make_bundle(1, kGenesisVersion, 0x1234, 300);
  EXPECT_EQ(b.size_bytes(), 300u);
  EXPECT_EQ(b.id, fnv1a64(b.blob));
  const auto wire = encode_bundle(b);
  EXPECT_EQ(wire.size(), 27u + 300u);
  EXPECT_EQ(wire[0], 'G');
  EXPECT_EQ(wire[1], 'B');
  EXPECT_EQ(wire[2], '1');
  EXPECT_EQ(decode_bundle(wire), b);
}

TEST(Bundle, HeaderIsBigEndian) {
  const auto b = make_bundle(1, 0x0102030405060708ULL, 0x1112131415161718ULL, 0);
  const auto wire = encode_bundle(b);
  const std::vector<std::uint8_t> head(wire.begin() + 3, wire.begin() + 19);
  EXPECT_EQ(head, (std::vector<std::uint8_t>{1, 2, 3, 4, 5, 6, 7, 8, 0x11, 0x12, 0x13, 0x14, 0x15, 0x16, 0x17, 0x18}));
}

TEST(Bundle, TenKibNeedsFiftySevenFrames) {
  const auto b = make_bundle(0, kGenesisVersion, 7, 10 * 1024);
  EXPECT_EQ(codec::fragment_count(encode_bundle(b).size()), 57u);
}

TEST(Bundle, SameVersionIsAnError) {
  EXPECT_THROW(make_bundle(0, 5, 5, 10), std::invalid_argument);
}

TEST(Bundle, DecodeRejectsCorruption) {
  auto wire = encode_bundle(make_bundle(0, 1, 2, 64));
  wire.back() ^= 1;
  EXPECT_THROW(decode_bundle(wire), std::invalid_argument);
  EXPECT_THROW(decode_bundle(std::vector<std::uint8_t>{'G', 'B'}), std::invalid_argument);
  auto magic = encode_bundle(make_bundle(0, 1, 2, 4));
  magic[2] = '2';
  EXPECT_THROW(decode_bundle(magic), std::invalid_argument);
}

TEST(Bundle, Deterministic) {
  EXPECT_EQ(make_bundle(3, 1, 2, 100), make_bundle(3, 1, 2, 100));
  EXPECT_NE(make_bundle(3, 1, 2, 100).blob, make_bundle(4, 1, 2, 100).blob);
  const std::vector<std::uint8_t> blob{1, 2, 3};
  EXPECT_EQ(derive_version(5, blob), derive_version(5, blob));
  EXPECT_NE(derive_version(5, blob), derive_version(6, blob));
}

TEST(FileState, ApplyCases) {
  NodeFileState s(0);
  EXPECT_EQ(s.current_version(), kGenesisVersion);
  const auto b1 = make_bundle(1, kGenesisVersion, 100, 8);
  const auto b2 = make_bundle(1, 100, 200, 8);
  EXPECT_EQ(s.apply(b2), ApplyResult::kRejected);
  EXPECT_EQ(s.current_version(), kGenesisVersion);
  EXPECT_EQ(s.apply(b1), ApplyResult::kApplied);
  EXPECT_EQ(s.apply(b1), ApplyResult::kAlreadyApplied);
  EXPECT_EQ(s.apply(b2), ApplyResult::kApplied);
  EXPECT_EQ(s.current_version(), 200u);
  EXPECT_EQ(s.apply(make_snapshot(1, 900, 8)), ApplyResult::kApplied);
  EXPECT_EQ(s.current_version(), 900u);
}

// Publisher 0 and peers 1, 2 over a lossless medium.
struct SyncHarness {
  explicit SyncHarness(SyncConfig cfg) {
    radio::ChannelConfig ch;
    ch.path_loss.shadowing_sigma_db = 0.0;
    medium = std::make_unique<radio::Medium>(kernel, rng, radio::RadioParams{}, ch,
                                             std::vector<radio::NodePosition>{{0, 0, 0, 0}, {1, 5, 0, 0}, {2, 0, 5, 0}});
    for (NodeId n = 0; n < 3; ++n) {
      transport::ReliableTransport::Hooks hooks;
      hooks.deliver = [this, n](const transport::Delivery& d) { agents.at(n)->on_delivery(d); };
      hooks.outcome = [this, n](const transport::TransferOutcome& o) { agents.at(n)->on_outcome(o); };
      transports[n] = std::make_unique<transport::ReliableTransport>(n, kernel, *medium, rng,
                                                                     transport::TransportConfig{}, hooks);
      agents[n] = std::make_unique<SyncAgent>(n, std::vector<NodeId>{0, 1, 2}, cfg, kernel, *transports[n]);
    }
    medium->set_receive_sink([this](NodeId rx, const radio::TransmissionRecord& rec) {
      transports.at(rx)->on_frame_received(codec::decode_frame(rec.wire));
    });
    for (auto& [_, a] : agents) a->start();
  }

  sim::Kernel kernel;
  sim::RngRegistry rng{2};
  std::unique_ptr<radio::Medium> medium;
  std::map<NodeId, std::unique_ptr<transport::ReliableTransport>> transports;
  std::map<NodeId, std::unique_ptr<SyncAgent>> agents;
};

SyncConfig sync_config() {
  SyncConfig cfg;
  cfg.enabled = true;
  cfg.publisher = 0;
  cfg.interval = std::chrono::minutes(30);
  return cfg;
}

TEST(SyncAgent, PeersConverge) {
  SyncHarness h(sync_config());
  h.kernel.run_until(SimTime::from(std::chrono::minutes(100)));
  const auto v = h.agents[0]->state().current_version();
  EXPECT_EQ(h.agents[0]->stats().published, 3u);
  EXPECT_NE(v, kGenesisVersion);
  EXPECT_EQ(h.agents[1]->state().current_version(), v);
  EXPECT_EQ(h.agents[2]->state().current_version(), v);
  EXPECT_EQ(h.agents[1]->stats().applied, 3u);
}

TEST(SyncAgent, StalePeerResyncsWithSnapshot) {
  auto cfg = sync_config();
  cfg.last_publish = SimTime::from(std::chrono::minutes(125));
  SyncHarness h(cfg);
  h.agents[2]->stop();
  h.kernel.run_until(SimTime::from(std::chrono::minutes(35)));
  h.agents[2]->start();
  // The snapshot waits for airtime until the first round leaves the duty window.
  h.kernel.run_until(SimTime::from(std::chrono::minutes(240)));
  const auto v = h.agents[0]->state().current_version();
  EXPECT_EQ(h.agents[0]->stats().published, 4u);
  EXPECT_EQ(h.agents[1]->state().current_version(), v);
  EXPECT_EQ(h.agents[2]->state().current_version(), v);
  EXPECT_EQ(h.agents[2]->stats().rejected, 1u);
  EXPECT_EQ(h.agents[0]->stats().resync_requests, 1u);
  EXPECT_EQ(h.agents[0]->stats().snapshots_sent, 1u);
  EXPECT_GT(h.agents[0]->stats().paced, 0u);
  // A delta queued behind the snapshot was folded into the next one.
  EXPECT_EQ(h.agents[0]->stats().superseded, 1u);
}

TEST(SyncAgent, NoPublishAfterCutoff) {
  auto cfg = sync_config();
  cfg.last_publish = SimTime::from(std::chrono::minutes(45));
  SyncHarness h(cfg);
  h.kernel.run_until(SimTime::from(std::chrono::minutes(200)));
  EXPECT_EQ(h.agents[0]->stats().published, 1u);
}

}  // namespace
}  // namespace lorasim::metrics
