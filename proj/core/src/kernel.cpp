#include "lorasim/sim/kernel.hpp"

#include <stdexcept>

namespace lorasim::sim {

EventHandle Kernel::schedule(SimTime at, Action action, Target target, std::string label) {
  if (at < now_) {
    throw std::invalid_argument("cannot schedule event in the past (at " + std::to_string(at.us()) +
                                "us, now " + std::to_string(now_.us()) + "us)");
  }
  const std::uint64_t seq = next_sequence_++;
  queue_.push(Event{at, seq, target, std::move(label), std::move(action)});
  live_.insert(seq);
  return EventHandle{seq};
}

EventHandle Kernel::schedule_in(Duration delay, Action action, Target target, std::string label) {
  if (delay.count() < 0) throw std::invalid_argument("negative delay");
  return schedule(now_ + delay, std::move(action), target, std::move(label));
}

bool Kernel::cancel(EventHandle handle) {
  if (!handle.valid() || !live_.contains(handle.sequence)) return false;
  live_.erase(handle.sequence);
  cancelled_.insert(handle.sequence);
  return true;
}

std::size_t Kernel::run_until(SimTime t_end) {
  std::size_t dispatched = 0;
  while (!queue_.empty() && queue_.top().fire_time <= t_end) {
    // priority_queue::top is const; the event is moved out before pop.
    Event ev = std::move(const_cast<Event&>(queue_.top()));
    queue_.pop();
    if (cancelled_.erase(ev.sequence)) continue;
    live_.erase(ev.sequence);
    now_ = ev.fire_time;
    if (tracing_) trace_.push_back(TraceEntry{ev.fire_time, ev.sequence, ev.target, ev.label});
    ev.action();
    ++dispatched;
  }
  if (t_end > now_) now_ = t_end;
  return dispatched;
}

}  // namespace lorasim::sim
