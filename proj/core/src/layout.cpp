#include "lorasim/cluster/layout.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lorasim::cluster {
namespace {

std::vector<Duration> millis(std::initializer_list<int> values) {
  std::vector<Duration> out;
  for (const int v : values) out.emplace_back(std::chrono::milliseconds(v));
  return out;
}

// Measured redeploy times in seconds, seven trials per image size.
const std::vector<Duration>& row_8_83() {
  static const auto r = millis({1330, 1310, 1020, 980, 930, 920, 850});
  return r;
}
const std::vector<Duration>& row_339() {
  static const auto r = millis({940, 1530, 980, 1280, 1000, 1330, 920});
  return r;
}
const std::vector<Duration>& row_5470() {
  static const auto r = millis({1170, 1070, 1300, 1000, 1310, 900, 1000});
  return r;
}

}  // namespace

Duration StartTimeModel::sample(sim::RngStream& rng) const {
  switch (kind) {
    case Kind::kConstant: return constant;
    case Kind::kEmpirical:
      if (samples.empty()) throw std::logic_error("empirical start-time model without samples");
      return samples[rng.below(samples.size())];
    case Kind::kUniform:
      return lo + Duration(static_cast<std::int64_t>(rng.uniform() * static_cast<double>((hi - lo).count())));
  }
  return constant;
}

Duration StartTimeModel::min() const {
  switch (kind) {
    case Kind::kConstant: return constant;
    case Kind::kEmpirical: return *std::min_element(samples.begin(), samples.end());
    case Kind::kUniform: return lo;
  }
  return constant;
}

Duration StartTimeModel::max() const {
  switch (kind) {
    case Kind::kConstant: return constant;
    case Kind::kEmpirical: return *std::max_element(samples.begin(), samples.end());
    case Kind::kUniform: return hi;
  }
  return constant;
}

StartTimeModel StartTimeModel::constant_of(Duration d) {
  StartTimeModel m;
  m.kind = Kind::kConstant;
  m.label = "constant";
  m.constant = d;
  return m;
}

StartTimeModel StartTimeModel::uniform_between(Duration lo, Duration hi) {
  if (hi < lo) throw std::invalid_argument("uniform start-time model needs lo <= hi");
  StartTimeModel m;
  m.kind = Kind::kUniform;
  m.label = "uniform";
  m.lo = lo;
  m.hi = hi;
  return m;
}

StartTimeModel StartTimeModel::empirical(std::vector<Duration> samples, std::string label) {
  if (samples.empty()) throw std::invalid_argument("empirical start-time model needs samples");
  StartTimeModel m;
  m.kind = Kind::kEmpirical;
  m.label = std::move(label);
  m.samples = std::move(samples);
  return m;
}

StartTimeModel StartTimeModel::measured_pool() {
  std::vector<Duration> pool = row_8_83();
  pool.insert(pool.end(), row_339().begin(), row_339().end());
  pool.insert(pool.end(), row_5470().begin(), row_5470().end());
  return empirical(std::move(pool), "measured");
}

StartTimeModel StartTimeModel::measured_row(double image_size_mb) {
  if (std::abs(image_size_mb - 8.83) < 1e-6) return empirical(row_8_83(), "measured-8.83");
  if (std::abs(image_size_mb - 339.0) < 1e-6) return empirical(row_339(), "measured-339");
  if (std::abs(image_size_mb - 5470.0) < 1e-6) return empirical(row_5470(), "measured-5470");
  throw std::invalid_argument("no measurements for an image of " + std::to_string(image_size_mb) + " MB");
}

StartTimeModel StartTimeModel::named(const std::string& name) {
  if (name == "measured") return measured_pool();
  if (name == "measured-8.83") return measured_row(8.83);
  if (name == "measured-339") return measured_row(339.0);
  if (name == "measured-5470") return measured_row(5470.0);
  throw std::invalid_argument("unknown start-time sample set '" + name + "'");
}

void ServiceLayout::add(ServiceSpec spec, Placement placement) {
  const std::string id = spec.id;
  if (specs_.contains(id)) throw std::invalid_argument("service '" + id + "' declared twice");
  specs_.emplace(id, std::move(spec));
  placements_.emplace(id, std::move(placement));
}

void ServiceLayout::validate(const std::set<NodeId>& nodes) const {
  for (const auto& [id, spec] : specs_) {
    if (!(spec.image_size_mb > 0.0)) throw std::invalid_argument("service '" + id + "': image_size_mb must be > 0");
    const auto& p = placements_.at(id);
    if (!nodes.contains(p.primary))
      throw std::invalid_argument("service '" + id + "': unknown primary node " + std::to_string(p.primary));
    if (p.fallbacks.empty()) throw std::invalid_argument("service '" + id + "': fallback list is empty");
    std::set<NodeId> seen;
    for (const auto f : p.fallbacks) {
      if (f == p.primary) throw std::invalid_argument("service '" + id + "': primary listed as a fallback");
      if (!nodes.contains(f))
        throw std::invalid_argument("service '" + id + "': unknown fallback node " + std::to_string(f));
      if (!seen.insert(f).second)
        throw std::invalid_argument("service '" + id + "': duplicate fallback " + std::to_string(f));
    }
  }
}

std::vector<std::string> ServiceLayout::services() const {
  std::vector<std::string> out;
  for (const auto& [id, _] : specs_) out.push_back(id);
  return out;
}

std::size_t ServiceLayout::rank(const std::string& service, NodeId node) const {
  const auto& p = placements_.at(service);
  if (p.primary == node) return 0;
  auto it = std::find(p.fallbacks.begin(), p.fallbacks.end(), node);
  return it == p.fallbacks.end() ? p.fallbacks.size() + 1 : static_cast<std::size_t>(it - p.fallbacks.begin()) + 1;
}

}  // namespace lorasim::cluster
