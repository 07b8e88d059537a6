#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>

namespace lorasim::sim {

/// xoshiro256** generator. Output is defined bit-for-bit so runs replay across
/// standard library implementations.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed);

  std::uint64_t next_u64();
  /// Uniform in [0, 1) with 53 bits of resolution.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);
  /// Standard normal via Box-Muller.
  double normal();

 private:
  std::uint64_t s_[4];
};

/// Named, independently seeded random streams derived from one scenario seed.
/// Drawing from one stream never perturbs another.
class RngRegistry {
 public:
  explicit RngRegistry(std::uint64_t seed) : seed_(seed) {}

  RngStream& register_stream(std::string_view name);
  /// Throws std::out_of_range for an unregistered name.
  RngStream& stream(std::string_view name);
  double draw(std::string_view name) { return stream(name).uniform(); }

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::map<std::string, RngStream, std::less<>> streams_;
};

/// Well-known stream names.
namespace streams {
inline constexpr std::string_view kLoss = "loss";
inline constexpr std::string_view kJitter = "jitter";
inline constexpr std::string_view kStartTime = "start-time";
inline constexpr std::string_view kShadowing = "shadowing";
inline constexpr std::string_view kBackoff = "backoff";
inline constexpr std::string_view kLoad = "load";
}  // namespace streams

}  // namespace lorasim::sim
