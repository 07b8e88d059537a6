#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "lorasim/sim/kernel.hpp"
#include "lorasim/sim/rng.hpp"

namespace lorasim::cluster {

/// Container start-up time distribution. The image is assumed cached on every
/// node, so the draw never depends on image size.
struct StartTimeModel {
  enum class Kind { kConstant, kEmpirical, kUniform };

  Kind kind = Kind::kEmpirical;
  std::string label;
  Duration constant{std::chrono::seconds(1)};
  std::vector<Duration> samples;
  Duration lo{0};
  Duration hi{0};

  Duration sample(sim::RngStream& rng) const;
  Duration min() const;
  Duration max() const;

  static StartTimeModel constant_of(Duration d);
  static StartTimeModel uniform_between(Duration lo, Duration hi);
  static StartTimeModel empirical(std::vector<Duration> samples, std::string label);
  /// All 21 measured failover times for 8.83 MB, 339 MB and 5470 MB images.
  static StartTimeModel measured_pool();
  /// The seven measurements for one image size (8.83, 339 or 5470 MB).
  static StartTimeModel measured_row(double image_size_mb);
  /// Named empirical sets: "measured" (pool), "measured-8.83", "measured-339", "measured-5470".
  static StartTimeModel named(const std::string& name);
};

struct ServiceSpec {
  std::string id;
  double image_size_mb = 1.0;
  StartTimeModel start_time = StartTimeModel::measured_pool();
};

struct Placement {
  NodeId primary = 0;
  std::vector<NodeId> fallbacks;
};

/// Desired service layout: each service's primary host and ordered fallbacks.
class ServiceLayout {
 public:
  void add(ServiceSpec spec, Placement placement);

  /// Throws std::invalid_argument on empty/duplicate fallbacks, a fallback equal
  /// to the primary, unknown nodes or non-positive image sizes.
  void validate(const std::set<NodeId>& nodes) const;

  bool contains(const std::string& service) const { return placements_.contains(service); }
  const ServiceSpec& spec(const std::string& service) const { return specs_.at(service); }
  const Placement& placement(const std::string& service) const { return placements_.at(service); }
  std::vector<std::string> services() const;
  /// Position in [primary, fallbacks...]; nodes outside the list rank last.
  std::size_t rank(const std::string& service, NodeId node) const;

 private:
  std::map<std::string, ServiceSpec> specs_;
  std::map<std::string, Placement> placements_;
};

}  // namespace lorasim::cluster
