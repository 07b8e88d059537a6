#include <gtest/gtest.h>

#include <algorithm>
#include <vector>

#include "lorasim/radio/duty_cycle.hpp"
#include "lorasim/sim/rng.hpp"

namespace lorasim::radio {
namespace {

// O(n^2) reference: the busiest window either ends at an interval end or
// starts at an interval start.
std::int64_t brute_peak(const std::vector<Interval>& log, std::int64_t w) {
  auto covered = [&](std::int64_t from, std::int64_t to) {
    std::int64_t total = 0;
    for (const auto& iv : log) {
      const auto s = static_cast<std::int64_t>(iv.start.us());
      const auto e = static_cast<std::int64_t>(iv.end().us());
      total += std::max<std::int64_t>(0, std::min(e, to) - std::max(s, from));
    }
    return total;
  };
  std::int64_t best = 0;
  for (const auto& iv : log) {
    const auto s = static_cast<std::int64_t>(iv.start.us());
    const auto e = static_cast<std::int64_t>(iv.end().us());
    best = std::max({best, covered(e - w, e), covered(s, s + w)});
  }
  return best;
}

TEST(DutyCycle, BudgetIsOnePercentOfAnHour) {
  DutyCycleLedger ledger;
  EXPECT_EQ(ledger.budget(), std::chrono::seconds(36));
}

TEST(DutyCycle, AdmitsUpToBudgetThenDefers) {
  DutyCycleLedger ledger(Duration(1000), 1, 10);
  ledger.record(0, SimTime(0), Duration(60));
  EXPECT_TRUE(ledger.admits(0, SimTime(100), Duration(40)));
  EXPECT_FALSE(ledger.admits(0, SimTime(100), Duration(41)));
  // The 60 us frame slides out of the window from t = 1000 onward.
  EXPECT_EQ(ledger.next_allowed(0, SimTime(100), Duration(41)), SimTime(960));
  EXPECT_EQ(ledger.next_allowed(0, SimTime(100), Duration(101)), SimTime::max());
}

TEST(DutyCycle, NodesAreIndependent) {
  DutyCycleLedger ledger(Duration(1000), 1, 10);
  ledger.record(0, SimTime(0), Duration(100));
  EXPECT_FALSE(ledger.admits(0, SimTime(100), Duration(1)));
  EXPECT_TRUE(ledger.admits(1, SimTime(100), Duration(100)));
}

TEST(DutyCycle, CancelFromDropsReservations) {
  DutyCycleLedger ledger(Duration(1000), 1, 10);
  ledger.record(0, SimTime(0), Duration(50));
  ledger.record(0, SimTime(200), Duration(50));
  ledger.cancel_from(0, SimTime(100));
  EXPECT_EQ(ledger.used_in_window(0, SimTime(1000)), Duration(50));
}

TEST(DutyCycle, RejectsOverlappingRecords) {
  DutyCycleLedger ledger(Duration(1000), 1, 10);
  ledger.record(0, SimTime(0), Duration(50));
  EXPECT_THROW(ledger.record(0, SimTime(49), Duration(5)), std::logic_error);
}

TEST(DutyCycle, GreedyScheduleNeverExceedsBudgetAndIsTight) {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    sim::RngStream rng(seed);
    const std::int64_t w = 1000;
    DutyCycleLedger ledger(Duration(w), 1, 10);
    std::vector<Interval> log;
    SimTime t(0);
    for (int i = 0; i < 200; ++i) {
      const Duration air(1 + static_cast<std::int64_t>(rng.below(40)));
      t = t + Duration(static_cast<std::int64_t>(rng.below(30)));
      const SimTime at = ledger.next_allowed(0, t, air);
      ASSERT_NE(at, SimTime::max());
      ASSERT_TRUE(ledger.admits(0, at, air));
      if (at > t) {
        EXPECT_FALSE(ledger.admits(0, at - Duration(1), air)) << "seed " << seed << " step " << i;
      }
      ledger.record(0, at, air);
      log.push_back({at, air});
      t = at + air;
    }
    EXPECT_LE(brute_peak(log, w), ledger.budget().count()) << "seed " << seed;
    EXPECT_EQ(peak_window_airtime(log, Duration(w)).count(), brute_peak(log, w)) << "seed " << seed;
  }
}

TEST(DutyCycle, PeakMatchesBruteForceOnRandomLogs) {
  sim::RngStream rng(99);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Interval> log;
    SimTime t(rng.below(50));
    const int n = 1 + static_cast<int>(rng.below(30));
    for (int i = 0; i < n; ++i) {
      const Duration len(1 + static_cast<std::int64_t>(rng.below(100)));
      log.push_back({t, len});
      t = t + len + Duration(static_cast<std::int64_t>(rng.below(400)));
    }
    const std::int64_t w = 50 + static_cast<std::int64_t>(rng.below(1000));
    EXPECT_EQ(peak_window_airtime(log, Duration(w)).count(), brute_peak(log, w));
  }
}

}  // namespace
}  // namespace lorasim::radio
