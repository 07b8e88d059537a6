#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <queue>
#include <string>
#include <unordered_set>
#include <vector>

#include "lorasim/time.hpp"

namespace lorasim {

using NodeId = std::uint8_t;
inline constexpr NodeId kBroadcast = 255;

}  // namespace lorasim

namespace lorasim::sim {

/// Event target: a node id, or nullopt for global (scenario-level) events.
using Target = std::optional<NodeId>;

struct EventHandle {
  std::uint64_t sequence = 0;
  bool valid() const { return sequence != 0; }
};

struct TraceEntry {
  SimTime time;
  std::uint64_t sequence;
  Target target;
  std::string label;

  bool operator==(const TraceEntry&) const = default;
};

/// Single-threaded discrete-event loop. Events at equal times dispatch in the
/// order they were scheduled.
class Kernel {
 public:
  using Action = std::function<void()>;

  SimTime now() const { return now_; }

  /// Throws std::invalid_argument if `at` is earlier than now().
  EventHandle schedule(SimTime at, Action action, Target target = std::nullopt, std::string label = {});
  EventHandle schedule_in(Duration delay, Action action, Target target = std::nullopt, std::string label = {});

  /// Returns false if the event already ran, was cancelled, or never existed.
  bool cancel(EventHandle handle);

  /// Dispatches every event with fire_time <= t_end; afterwards now() == t_end
  /// (or stays put if t_end is in the past). Returns the number dispatched.
  std::size_t run_until(SimTime t_end);

  std::size_t pending() const { return queue_.size() - cancelled_.size(); }

  void enable_trace(bool on) { tracing_ = on; }
  const std::vector<TraceEntry>& trace() const { return trace_; }

 private:
  struct Event {
    SimTime fire_time;
    std::uint64_t sequence;
    Target target;
    std::string label;
    Action action;
  };
  struct Later {
    bool operator()(const Event& a, const Event& b) const {
      if (a.fire_time != b.fire_time) return a.fire_time > b.fire_time;
      return a.sequence > b.sequence;
    }
  };

  SimTime now_{};
  std::uint64_t next_sequence_ = 1;
  std::priority_queue<Event, std::vector<Event>, Later> queue_;
  std::unordered_set<std::uint64_t> live_;
  std::unordered_set<std::uint64_t> cancelled_;
  bool tracing_ = false;
  std::vector<TraceEntry> trace_;
};

}  // namespace lorasim::sim
