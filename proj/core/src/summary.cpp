#include "lorasim/scenario/summary.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace lorasim::scenario {

using nlohmann::json;

double quantile_sorted(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) throw std::invalid_argument("quantile of an empty sample");
  if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("quantile outside [0, 1]");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

LatencyStats latency_stats(std::vector<double> v, double spike_factor, double spike_threshold_s) {
  LatencyStats s;
  s.count = v.size();
  if (v.empty()) return s;
  std::sort(v.begin(), v.end());
  s.median_s = quantile_sorted(v, 0.5);
  s.p95_s = quantile_sorted(v, 0.95);
  s.max_s = v.back();
  s.mean_s = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  s.threshold_s = spike_threshold_s >= 0 ? spike_threshold_s : spike_factor * s.median_s;
  s.spikes = static_cast<std::size_t>(v.end() - std::upper_bound(v.begin(), v.end(), s.threshold_s));
  return s;
}

namespace {

json stats_json(const LatencyStats& s) {
  return {{"count", s.count},   {"median_s", s.median_s}, {"p95_s", s.p95_s},           {"max_s", s.max_s},
          {"mean_s", s.mean_s}, {"spikes", s.spikes},     {"threshold_s", s.threshold_s}};
}

LatencyStats stats_from(const json& j) {
  LatencyStats s;
  s.count = j.at("count").get<std::size_t>();
  s.median_s = j.at("median_s").get<double>();
  s.p95_s = j.at("p95_s").get<double>();
  s.max_s = j.at("max_s").get<double>();
  s.mean_s = j.at("mean_s").get<double>();
  s.spikes = j.at("spikes").get<std::size_t>();
  s.threshold_s = j.at("threshold_s").get<double>();
  return s;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

}  // namespace

std::string summary_to_json(const RunSummary& s) {
  json j;
  j["scenario"] = s.scenario;
  j["seed"] = s.seed;
  j["duration_us"] = s.duration.count();
  j["node_count"] = s.node_count;
  j["spike_factor"] = s.spike_factor;
  j["latency"] = stats_json(s.latency);
  json nodes = json::array();
  for (const auto& n : s.per_node) {
    nodes.push_back({{"node", n.node}, {"sampled", n.sampled}, {"ingested", n.ingested}, {"latency", stats_json(n.latency)}});
  }
  j["per_node"] = nodes;
  j["packets"] = {{"sampled", s.sampled},
                  {"ingested", s.ingested},
                  {"lost", s.lost},
                  {"in_flight", s.in_flight},
                  {"delivery_ratio", s.delivery_ratio}};
  j["radio"] = {{"transmissions", s.transmissions},
                {"collisions", s.collisions},
                {"frames_sent", s.frames_sent},
                {"retransmissions", s.retransmissions},
                {"transfers_failed", s.transfers_failed},
                {"duty_cycle_peak_s", s.duty_cycle_peak_s},
                {"duty_cycle_budget_s", s.duty_cycle_budget_s}};
  json rows = json::array();
  for (const auto& f : s.failovers) {
    rows.push_back({{"service", f.service},
                    {"from", f.from},
                    {"to", f.to},
                    {"detect_us", f.detect.count()},
                    {"start_us", f.start.count()},
                    {"total_us", f.total.count()},
                    {"spurious", f.spurious}});
  }
  j["failover"] = {{"redeploys", s.failovers.size()},
                   {"rows", rows},
                   {"unplaceable_events", s.unplaceable_events},
                   {"ownership_overlaps", s.ownership_overlaps},
                   {"ownership_overlap_us", s.ownership_overlap_time.count()},
                   {"unplaced_at_end", s.unplaced_at_end}};
  j["sync"] = {{"enabled", s.sync_enabled},
               {"converged", s.sync_converged},
               {"published", s.sync_published},
               {"rejected", s.sync_rejected}};
  return j.dump(2) + "\n";
}

RunSummary summary_from_json(const std::string& text) {
  try {
    const auto j = json::parse(text);
    RunSummary s;
    s.scenario = j.at("scenario").get<std::string>();
    s.seed = j.at("seed").get<std::uint64_t>();
    s.duration = Duration(j.at("duration_us").get<std::int64_t>());
    s.node_count = j.at("node_count").get<std::size_t>();
    s.spike_factor = j.at("spike_factor").get<double>();
    s.latency = stats_from(j.at("latency"));
    for (const auto& n : j.at("per_node")) {
      s.per_node.push_back({n.at("node").get<NodeId>(), stats_from(n.at("latency")), n.at("sampled").get<std::uint64_t>(),
                            n.at("ingested").get<std::uint64_t>()});
    }
    const auto& p = j.at("packets");
    s.sampled = p.at("sampled").get<std::uint64_t>();
    s.ingested = p.at("ingested").get<std::uint64_t>();
    s.lost = p.at("lost").get<std::uint64_t>();
    s.in_flight = p.at("in_flight").get<std::uint64_t>();
    s.delivery_ratio = p.at("delivery_ratio").get<double>();
    const auto& r = j.at("radio");
    s.transmissions = r.at("transmissions").get<std::uint64_t>();
    s.collisions = r.at("collisions").get<std::uint64_t>();
    s.frames_sent = r.at("frames_sent").get<std::uint64_t>();
    s.retransmissions = r.at("retransmissions").get<std::uint64_t>();
    s.transfers_failed = r.at("transfers_failed").get<std::uint64_t>();
    s.duty_cycle_peak_s = r.at("duty_cycle_peak_s").get<double>();
    s.duty_cycle_budget_s = r.at("duty_cycle_budget_s").get<double>();
    const auto& f = j.at("failover");
    s.unplaceable_events = f.at("unplaceable_events").get<std::uint64_t>();
    s.ownership_overlaps = f.at("ownership_overlaps").get<std::uint64_t>();
    s.ownership_overlap_time = Duration(f.at("ownership_overlap_us").get<std::int64_t>());
    s.unplaced_at_end = f.at("unplaced_at_end").get<std::vector<std::string>>();
    const auto& y = j.at("sync");
    s.sync_enabled = y.at("enabled").get<bool>();
    s.sync_converged = y.at("converged").get<bool>();
    s.sync_published = y.at("published").get<std::uint64_t>();
    s.sync_rejected = y.at("rejected").get<std::uint64_t>();
    return s;
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("malformed summary: ") + e.what());
  }
}

CompareReport compare_runs(const RunSummary& a, const RunSummary& b) {
  if (a.duration != b.duration)
    throw std::invalid_argument("runs differ in duration (" + format_duration(a.duration) + " vs " +
                                format_duration(b.duration) + ")");
  if (a.node_count != b.node_count)
    throw std::invalid_argument("runs differ in node count (" + std::to_string(a.node_count) + " vs " +
                                std::to_string(b.node_count) + ")");
  CompareReport r;
  r.median_delta_s = b.latency.median_s - a.latency.median_s;
  r.p95_delta_s = b.latency.p95_s - a.latency.p95_s;
  r.delivery_ratio_delta = b.delivery_ratio - a.delivery_ratio;
  r.collisions_delta = static_cast<std::int64_t>(b.collisions) - static_cast<std::int64_t>(a.collisions);
  return r;
}

std::string format_compare(const RunSummary& a, const RunSummary& b, const CompareReport& r) {
  std::ostringstream os;
  os << "a: " << a.scenario << " (seed " << a.seed << ")\n";
  os << "b: " << b.scenario << " (seed " << b.seed << ")\n";
  os << "metric             a            b            b-a\n";
  auto row = [&](const char* name, double va, double vb, double d, const char* f) {
    os << name;
    for (std::size_t i = std::string(name).size(); i < 19; ++i) os << ' ';
    os << fmt(f, va) << ' ' << fmt(f, vb) << ' ' << fmt("%+12.4f", d) << '\n';
  };
  row("median_s", a.latency.median_s, b.latency.median_s, r.median_delta_s, "%12.4f");
  row("p95_s", a.latency.p95_s, b.latency.p95_s, r.p95_delta_s, "%12.4f");
  row("delivery_ratio", a.delivery_ratio, b.delivery_ratio, r.delivery_ratio_delta, "%12.4f");
  row("collisions", static_cast<double>(a.collisions), static_cast<double>(b.collisions),
      static_cast<double>(r.collisions_delta), "%12.0f");
  return os.str();
}

std::string format_summary(const RunSummary& s) {
  std::ostringstream os;
  os << "scenario " << s.scenario << ", seed " << s.seed << ", " << format_duration(s.duration) << ", "
     << s.node_count << " nodes\n";
  os << "latency: n=" << s.latency.count << " median=" << fmt("%.3f", s.latency.median_s)
     << "s p95=" << fmt("%.3f", s.latency.p95_s) << "s max=" << fmt("%.3f", s.latency.max_s)
     << "s spikes=" << s.latency.spikes << " (>" << fmt("%.3f", s.latency.threshold_s) << "s)\n";
  os << "packets: sampled=" << s.sampled << " ingested=" << s.ingested << " lost=" << s.lost
     << " in_flight=" << s.in_flight << " delivery=" << fmt("%.4f", s.delivery_ratio) << "\n";
  os << "radio: tx=" << s.transmissions << " collided=" << s.collisions << " retransmissions=" << s.retransmissions
     << " duty_peak=" << fmt("%.3f", s.duty_cycle_peak_s) << "s/" << fmt("%.0f", s.duty_cycle_budget_s) << "s\n";
  os << "failover: redeploys=" << s.failovers.size() << " overlaps=" << s.ownership_overlaps
     << " unplaced_at_end=" << s.unplaced_at_end.size() << "\n";
  if (!s.failovers.empty()) {
    os << "  service        from to  detect_s  start_s  total_s\n";
    for (const auto& f : s.failovers) {
      std::string name = f.service;
      name.resize(std::max<std::size_t>(name.size(), 14), ' ');
      os << "  " << name << ' ' << fmt("%4.0f", f.from) << ' ' << fmt("%2.0f", f.to) << ' '
         << fmt("%9.3f", to_seconds(f.detect)) << ' ' << fmt("%8.3f", to_seconds(f.start)) << ' '
         << fmt("%8.3f", to_seconds(f.total)) << '\n';
    }
  }
  if (s.sync_enabled)
    os << "sync: published=" << s.sync_published << " rejected=" << s.sync_rejected
       << " converged=" << (s.sync_converged ? "yes" : "no") << "\n";
  return os.str();
}

}  // namespace lorasim::scenario
