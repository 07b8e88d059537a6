#pragma once

#include <chrono>
#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace lorasim {

/// Signed span of simulated time. All durations are integer microseconds.
using Duration = std::chrono::microseconds;

using namespace std::chrono_literals;

/// Absolute simulated time: microseconds since scenario start.
class SimTime {
 public:
  constexpr SimTime() = default;
  constexpr explicit SimTime(std::uint64_t us) : us_(us) {}

  static constexpr SimTime from(Duration since_start) {
    return SimTime(static_cast<std::uint64_t>(since_start.count() < 0 ? 0 : since_start.count()));
  }
  static constexpr SimTime max() { return SimTime(UINT64_MAX); }

  constexpr std::uint64_t us() const { return us_; }
  constexpr Duration since_start() const { return Duration(static_cast<std::int64_t>(us_)); }

  constexpr auto operator<=>(const SimTime&) const = default;

  constexpr SimTime operator+(Duration d) const {
    return SimTime(static_cast<std::uint64_t>(static_cast<std::int64_t>(us_) + d.count()));
  }
  constexpr SimTime operator-(Duration d) const { return *this + (-d); }
  constexpr Duration operator-(SimTime other) const {
    return Duration(static_cast<std::int64_t>(us_) - static_cast<std::int64_t>(other.us_));
  }
  constexpr SimTime& operator+=(Duration d) { return *this = *this + d; }

 private:
  std::uint64_t us_ = 0;
};

/// Parses "250us", "1500ms", "90s", "30m", "2h", "1d" or a bare number of seconds.
Duration parse_duration(std::string_view text);

/// Compact human form, e.g. "1h30m", "2.5s".
std::string format_duration(Duration d);

inline double to_seconds(Duration d) { return static_cast<double>(d.count()) / 1e6; }

}  // namespace lorasim
