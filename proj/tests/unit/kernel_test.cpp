#include <gtest/gtest.h>

#include <stdexcept>
#include <vector>

#include "lorasim/sim/kernel.hpp"
#include "lorasim/sim/rng.hpp"
#include "lorasim/time.hpp"

namespace lorasim::sim {
namespace {

TEST(Kernel, DispatchesByTimeThenInsertionOrder) {
  Kernel k;
  std::vector<int> order;
  k.schedule(SimTime(20), [&] { order.push_back(3); });
  k.schedule(SimTime(10), [&] { order.push_back(1); });
  k.schedule(SimTime(10), [&] { order.push_back(2); });
  EXPECT_EQ(k.run_until(SimTime(100)), 3u);
  EXPECT_EQ(order, (std::vector<int>{1, 2, 3}));
  EXPECT_EQ(k.now(), SimTime(100));
}

TEST(Kernel, RunUntilIsInclusiveAndStops) {
  Kernel k;
  int fired = 0;
  k.schedule(SimTime(10), [&] { ++fired; });
  k.schedule(SimTime(11), [&] { ++fired; });
  k.run_until(SimTime(10));
  EXPECT_EQ(fired, 1);
  EXPECT_EQ(k.pending(), 1u);
}

TEST(Kernel, CancelPreventsDispatch) {
  Kernel k;
  int fired = 0;
  auto h = k.schedule(SimTime(5), [&] { ++fired; });
  EXPECT_TRUE(k.cancel(h));
  EXPECT_FALSE(k.cancel(h));
  k.run_until(SimTime(10));
  EXPECT_EQ(fired, 0);
  EXPECT_FALSE(k.cancel(EventHandle{}));
}

TEST(Kernel, RejectsPastEvents) {
  Kernel k;
  k.run_until(SimTime(50));
  EXPECT_THROW(k.schedule(SimTime(49), [] {}), std::invalid_argument);
  EXPECT_NO_THROW(k.schedule(SimTime(50), [] {}));
}

TEST(Kernel, EventsMayScheduleAtCurrentTime) {
  Kernel k;
  std::vector<int> order;
  k.schedule(SimTime(5), [&] {
    order.push_back(1);
    k.schedule(k.now(), [&] { order.push_back(3); });
  });
  k.schedule(SimTime(5), [&] { order.push_back(2); });
  k.run_until(SimTime(5));
  EXPECT_EQ(order, (std::vector<int>{1, 2, 3}));
}

TEST(Kernel, TraceRecordsDispatch) {
  Kernel k;
  k.enable_trace(true);
  k.schedule(SimTime(3), [] {}, NodeId{2}, "tick");
  k.run_until(SimTime(3));
  ASSERT_EQ(k.trace().size(), 1u);
  EXPECT_EQ(k.trace()[0].label, "tick");
  EXPECT_EQ(k.trace()[0].target, std::optional<NodeId>(2));
}

TEST(Rng, StreamsAreIndependent) {
  RngRegistry a(7);
  RngRegistry b(7);
  a.register_stream("x");
  a.register_stream("y");
  b.register_stream("x");
  b.register_stream("y");
  for (int i = 0; i < 100; ++i) a.stream("y").next_u64();
  for (int i = 0; i < 10; ++i) EXPECT_EQ(a.stream("x").next_u64(), b.stream("x").next_u64());
}

TEST(Rng, SeedChangesOutput) {
  RngRegistry a(1);
  RngRegistry b(2);
  EXPECT_NE(a.register_stream("x").next_u64(), b.register_stream("x").next_u64());
}

TEST(Rng, UnknownStreamThrows) {
  RngRegistry r(1);
  EXPECT_THROW(r.stream("nope"), std::out_of_range);
}

TEST(Rng, UniformAndBelowRanges) {
  RngStream s(42);
  for (int i = 0; i < 10'000; ++i) {
    const double u = s.uniform();
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
    EXPECT_LT(s.below(7), 7u);
  }
}

TEST(Time, ParseAndFormat) {
  EXPECT_EQ(parse_duration("250us"), Duration(250));
  EXPECT_EQ(parse_duration("1500ms"), Duration(1'500'000));
  EXPECT_EQ(parse_duration("90s"), std::chrono::seconds(90));
  EXPECT_EQ(parse_duration("30m"), std::chrono::minutes(30));
  EXPECT_EQ(parse_duration("2h"), std::chrono::hours(2));
  EXPECT_EQ(parse_duration("1d"), std::chrono::hours(24));
  EXPECT_EQ(parse_duration("12"), std::chrono::seconds(12));
  EXPECT_THROW(parse_duration("soon"), std::invalid_argument);
  EXPECT_EQ(format_duration(std::chrono::minutes(90)), "1h30m");
}

}  // namespace
}  // namespace lorasim::sim
