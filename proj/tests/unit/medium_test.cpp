#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <vector>

#include "lorasim/radio/medium.hpp"

namespace lorasim::radio {
namespace {

// Independent statement of the rule: a frame survives at a receiver iff it
// clears sensitivity and, when it overlaps others, capture is on and it beats
// every other signal by the margin.
bool survives(std::size_t idx, const std::vector<double>& rssi, double sens, bool capture, double margin) {
  if (rssi[idx] < sens) return false;
  if (rssi.size() == 1) return true;
  if (!capture) return false;
  for (std::size_t j = 0; j < rssi.size(); ++j) {
    if (j != idx && rssi[idx] < rssi[j] + margin) return false;
  }
  return true;
}

TEST(Collision, EnumeratesAllOverlapCombinations) {
  const std::vector<double> levels{-140, -125, -120, -114, -110, -100, -94, -80};
  const double sens = -123;
  for (bool capture : {false, true}) {
    for (std::size_t n = 1; n <= 3; ++n) {
      std::vector<std::size_t> pick(n, 0);
      while (true) {
        std::vector<Reception> sig;
        std::vector<double> rssi;
        for (std::size_t i = 0; i < n; ++i) {
          sig.push_back({i + 1, levels[pick[i]]});
          rssi.push_back(levels[pick[i]]);
        }
        const auto got = resolve_reception(sig, sens, capture, 6.0);
        std::vector<std::uint64_t> want;
        for (std::size_t i = 0; i < n; ++i) {
          if (survives(i, rssi, sens, capture, 6.0)) want.push_back(i + 1);
        }
        EXPECT_EQ(got, want);
        EXPECT_LE(got.size(), 1u);
        std::size_t k = 0;
        while (k < n && ++pick[k] == levels.size()) pick[k++] = 0;
        if (k == n) break;
      }
    }
  }
}

TEST(Collision, MarginIsInclusive) {
  const std::vector<Reception> sig{{1, -90.0}, {2, -96.0}};
  EXPECT_EQ(resolve_reception(sig, -123, true, 6.0), std::vector<std::uint64_t>{1});
  const std::vector<Reception> close{{1, -90.0}, {2, -95.9}};
  EXPECT_TRUE(resolve_reception(close, -123, true, 6.0).empty());
}

class MediumFixture : public ::testing::Test {
 protected:
  void build(bool capture, std::vector<NodePosition> nodes) {
    ChannelConfig ch;
    ch.path_loss.shadowing_sigma_db = 0.0;
    ch.capture_enabled = capture;
    medium = std::make_unique<Medium>(kernel, rng, RadioParams{}, ch, std::move(nodes));
    medium->set_receive_sink([this](NodeId rx, const TransmissionRecord& r) { got[rx].push_back(r.sender); });
  }
  std::vector<std::uint8_t> frame(std::size_t n) { return std::vector<std::uint8_t>(n, 0xAB); }

  sim::Kernel kernel;
  sim::RngRegistry rng{1};
  std::unique_ptr<Medium> medium;
  std::map<NodeId, std::vector<NodeId>> got;
};

TEST_F(MediumFixture, LoneFrameReachesEveryone) {
  build(true, {{0, 0, 0, 0}, {1, 5, 0, 0}, {2, 10, 0, 0}});
  auto r = medium->try_transmit(0, kBroadcast, frame(20), SimTime(0));
  ASSERT_TRUE(std::holds_alternative<Accepted>(r));
  EXPECT_EQ(std::get<Accepted>(r).end - std::get<Accepted>(r).start, airtime(RadioParams{}, 20));
  kernel.run_until(SimTime(1'000'000));
  EXPECT_EQ(got[1], std::vector<NodeId>{0});
  EXPECT_EQ(got[2], std::vector<NodeId>{0});
  EXPECT_FALSE(medium->log()[0]->collided);
}

TEST_F(MediumFixture, OverlapWithoutCaptureLosesBoth) {
  build(false, {{0, 0, 0, 0}, {1, 3, 0, 0}, {2, 1, 0, 0}});
  medium->try_transmit(0, 2, frame(40), SimTime(0));
  medium->try_transmit(1, 2, frame(40), SimTime(10'000));
  kernel.run_until(SimTime(1'000'000));
  EXPECT_TRUE(got[2].empty());
  EXPECT_TRUE(medium->log()[0]->collided);
  EXPECT_TRUE(medium->log()[1]->collided);
  EXPECT_EQ(medium->stats().collided, 2u);
}

TEST_F(MediumFixture, CaptureKeepsStrongerSignal) {
  // Receiver 2 sits 1 m from node 0 and 3 m from node 1: 12.9 dB apart.
  build(true, {{0, 0, 0, 0}, {1, 4, 0, 0}, {2, 1, 0, 0}});
  medium->try_transmit(0, 2, frame(40), SimTime(0));
  medium->try_transmit(1, 2, frame(40), SimTime(10'000));
  kernel.run_until(SimTime(1'000'000));
  EXPECT_EQ(got[2], std::vector<NodeId>{0});
}

TEST_F(MediumFixture, BackToBackFramesDoNotCollide) {
  build(false, {{0, 0, 0, 0}, {1, 3, 0, 0}, {2, 1, 0, 0}});
  auto a = std::get<Accepted>(medium->try_transmit(0, 2, frame(40), SimTime(0)));
  medium->try_transmit(1, 2, frame(40), a.end);
  kernel.run_until(SimTime(1'000'000));
  EXPECT_EQ(got[2], (std::vector<NodeId>{0, 1}));
}

TEST_F(MediumFixture, HalfDuplexReceiverMissesFrame) {
  build(true, {{0, 0, 0, 0}, {1, 3, 0, 0}});
  medium->try_transmit(0, 1, frame(40), SimTime(0));
  medium->try_transmit(1, 0, frame(10), SimTime(5'000));
  kernel.run_until(SimTime(1'000'000));
  EXPECT_TRUE(got[1].empty());
  EXPECT_GE(medium->stats().half_duplex_misses, 1u);
}

TEST_F(MediumFixture, RejectsOversizeAndBusySender) {
  build(true, {{0, 0, 0, 0}, {1, 3, 0, 0}});
  EXPECT_THROW(medium->try_transmit(0, 1, frame(253), SimTime(0)), std::invalid_argument);
  medium->try_transmit(0, 1, frame(252), SimTime(0));
  EXPECT_THROW(medium->try_transmit(0, 1, frame(10), SimTime(1000)), std::logic_error);
}

TEST_F(MediumFixture, TruncatedFrameInterferesButIsNotDelivered) {
  build(false, {{0, 0, 0, 0}, {1, 3, 0, 0}, {2, 1, 0, 0}});
  medium->try_transmit(0, 2, frame(40), SimTime(0));
  medium->cancel_from(0, SimTime(5'000));
  kernel.run_until(SimTime(1'000'000));
  EXPECT_TRUE(got[2].empty());
  EXPECT_TRUE(medium->log()[0]->truncated);
}

TEST_F(MediumFixture, DutyCycleDefersSender) {
  build(true, {{0, 0, 0, 0}, {1, 3, 0, 0}});
  SimTime t(0);
  int accepted = 0;
  while (true) {
    auto r = medium->try_transmit(0, 1, frame(252), t);
    if (auto* d = std::get_if<Deferred>(&r)) {
      EXPECT_GT(d->next_allowed, t);
      break;
    }
    t = std::get<Accepted>(r).end;
    ++accepted;
  }
  // 36 s of budget holds 91 frames of 394 496 us.
  EXPECT_EQ(accepted, 91);
}

TEST(Propagation, LogDistanceRssi) {
  PathLossModel m;
  m.shadowing_sigma_db = 0;
  const NodePosition a{0, 0, 0, 0};
  const NodePosition b{1, 10, 0, 0};
  EXPECT_NEAR(rssi_at(a, b, 20, m), 20 - 40 - 27, 1e-9);
  EXPECT_THROW(rssi_at(a, a, 20, m), std::invalid_argument);
}

TEST(Propagation, ShadowingIsSymmetricAndFrozen) {
  sim::RngStream s(5);
  PathLossModel m;
  LinkTable t({{0, 0, 0, 0}, {1, 10, 0, 0}}, m, &s);
  EXPECT_EQ(t.shadowing(0, 1), t.shadowing(1, 0));
  EXPECT_EQ(t.rssi(0, 1, 14), t.rssi(1, 0, 14));
}

}  // namespace
}  // namespace lorasim::radio
