#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <span>
#include <vector>

#include "lorasim/sim/kernel.hpp"

namespace lorasim::radio {

struct Interval {
  SimTime start;
  Duration length;
  SimTime end() const { return start + length; }
};

/// Rolling-window airtime accounting per node. A transmission is admitted only
/// if, counting it, no sliding window of `window` length holds more than
/// budget_num/budget_den of the window in airtime.
class DutyCycleLedger {
 public:
  explicit DutyCycleLedger(Duration window = std::chrono::hours(1), std::int64_t budget_num = 1,
                           std::int64_t budget_den = 100);

  Duration window() const { return window_; }
  Duration budget() const { return budget_; }

  bool admits(NodeId node, SimTime start, Duration airtime) const;
  /// Earliest time >= start at which the transmission would be admitted.
  /// Returns SimTime::max() if airtime alone exceeds the budget.
  SimTime next_allowed(NodeId node, SimTime start, Duration airtime) const;

  void record(NodeId node, SimTime start, Duration airtime);
  /// Drops reservations that start at or after t.
  void cancel_from(NodeId node, SimTime t);

  /// Airtime overlapping [end - window, end).
  Duration used_in_window(NodeId node, SimTime end) const;

  /// Drops history that can no longer influence admission decisions at or after t.
  void prune(NodeId node, SimTime t);

 private:
  Duration window_;
  Duration budget_;
  struct History {
    std::deque<Interval> intervals;
    /// Running airtime total through each interval, in microseconds.
    std::deque<std::int64_t> through;
    std::int64_t dropped = 0;  // airtime of pruned intervals
  };
  /// Airtime of `h` inside [from, to).
  static Duration covered(const History& h, SimTime from, SimTime to);

  std::map<NodeId, History> log_;
};

/// Exact maximum airtime inside any sliding window over a non-overlapping,
/// start-sorted interval list.
Duration peak_window_airtime(std::span<const Interval> intervals, Duration window);

}  // namespace lorasim::radio
