#include "lorasim/radio/duty_cycle.hpp"

#include <algorithm>
#include <stdexcept>

namespace lorasim::radio {
DutyCycleLedger::DutyCycleLedger(Duration window, std::int64_t budget_num, std::int64_t budget_den)
    : window_(window), budget_(window.count() * budget_num / budget_den) {
  if (window.count() <= 0 || budget_num <= 0 || budget_den <= 0 || budget_num > budget_den)
    throw std::invalid_argument("invalid duty-cycle window or budget");
}

Duration DutyCycleLedger::covered(const History& h, SimTime from, SimTime to) {
  const auto& iv = h.intervals;
  const auto first = std::partition_point(iv.begin(), iv.end(), [&](const Interval& i) { return i.end() <= from; });
  const auto last = std::partition_point(first, iv.end(), [&](const Interval& i) { return i.start < to; });
  if (first >= last) return Duration{0};
  const auto fi = static_cast<std::size_t>(first - iv.begin());
  const auto li = static_cast<std::size_t>(last - iv.begin());
  std::int64_t total = h.through[li - 1] - (fi == 0 ? h.dropped : h.through[fi - 1]);
  if (iv[fi].start < from) total -= (from - iv[fi].start).count();
  if (iv[li - 1].end() > to) total -= (iv[li - 1].end() - to).count();
  return Duration(total);
}

Duration DutyCycleLedger::used_in_window(NodeId node, SimTime end) const {
  auto it = log_.find(node);
  if (it == log_.end()) return Duration{0};
  const SimTime from = end.us() > static_cast<std::uint64_t>(window_.count()) ? end - window_ : SimTime{};
  return covered(it->second, from, end);
}

bool DutyCycleLedger::admits(NodeId node, SimTime start, Duration airtime) const {
  // The airtime in windows ending inside [start, start + airtime] is non-decreasing,
  // so the window ending at start + airtime is the binding one.
  return airtime + used_in_window(node, start + airtime) <= budget_;
}

SimTime DutyCycleLedger::next_allowed(NodeId node, SimTime start, Duration airtime) const {
  if (airtime > budget_) return SimTime::max();
  if (admits(node, start, airtime)) return start;
  const auto& h = log_.at(node);

  const std::int64_t window_start_us = static_cast<std::int64_t>((start + airtime).us()) - window_.count();
  SimTime x = SimTime::from(Duration(window_start_us));
  Duration excess = airtime + covered(h, x, SimTime::max()) - budget_;
  auto rec = std::partition_point(h.intervals.begin(), h.intervals.end(), [&](const Interval& i) { return i.end() <= x; });
  for (; rec != h.intervals.end(); ++rec) {
    const SimTime from = std::max(rec->start, x);
    const Duration portion = rec->end() - from;
    if (excess <= portion) {
      x = from + excess;
      excess = Duration{0};
      break;
    }
    excess -= portion;
    x = rec->end();
  }
  const SimTime candidate = x + window_ - airtime;
  return std::max(candidate, start);
}

void DutyCycleLedger::record(NodeId node, SimTime start, Duration airtime) {
  auto& h = log_[node];
  if (!h.intervals.empty() && start < h.intervals.back().end())
    throw std::logic_error("overlapping transmissions recorded for node " + std::to_string(node));
  const std::int64_t before = h.through.empty() ? h.dropped : h.through.back();
  h.intervals.push_back(Interval{start, airtime});
  h.through.push_back(before + airtime.count());
}

void DutyCycleLedger::cancel_from(NodeId node, SimTime t) {
  auto it = log_.find(node);
  if (it == log_.end()) return;
  auto& h = it->second;
  while (!h.intervals.empty() && h.intervals.back().start >= t) {
    h.intervals.pop_back();
    h.through.pop_back();
  }
}

void DutyCycleLedger::prune(NodeId node, SimTime t) {
  auto it = log_.find(node);
  if (it == log_.end()) return;
  auto& h = it->second;
  if (t.us() <= static_cast<std::uint64_t>(window_.count())) return;
  const SimTime horizon = t - window_;
  while (!h.intervals.empty() && h.intervals.front().end() <= horizon) {
    h.dropped = h.through.front();
    h.intervals.pop_front();
    h.through.pop_front();
  }
}

Duration peak_window_airtime(std::span<const Interval> intervals, Duration window) {
  if (intervals.empty()) return Duration{0};
  std::vector<std::int64_t> prefix(intervals.size() + 1, 0);
  for (std::size_t i = 0; i < intervals.size(); ++i) prefix[i + 1] = prefix[i] + intervals[i].length.count();

  auto covered = [&](std::int64_t from, std::int64_t to) {
    // Airtime inside [from, to).
    auto first = std::partition_point(intervals.begin(), intervals.end(), [&](const Interval& iv) {
      return static_cast<std::int64_t>(iv.end().us()) <= from;
    });
    auto last = std::partition_point(intervals.begin(), intervals.end(), [&](const Interval& iv) {
      return static_cast<std::int64_t>(iv.start.us()) < to;
    });
    if (first >= last) return std::int64_t{0};
    const auto fi = static_cast<std::size_t>(first - intervals.begin());
    const auto li = static_cast<std::size_t>(last - intervals.begin());
    std::int64_t total = prefix[li] - prefix[fi];
    const auto head_start = static_cast<std::int64_t>(intervals[fi].start.us());
    if (head_start < from) total -= from - head_start;
    const auto tail_end = static_cast<std::int64_t>(intervals[li - 1].end().us());
    if (tail_end > to) total -= tail_end - to;
    return total;
  };

  std::int64_t best = 0;
  const std::int64_t w = window.count();
  for (const auto& iv : intervals) {
    const auto end = static_cast<std::int64_t>(iv.end().us());
    best = std::max(best, covered(end - w, end));
    const auto start = static_cast<std::int64_t>(iv.start.us());
    best = std::max(best, covered(start, start + w));
  }
  return Duration(best);
}

}  // namespace lorasim::radio
