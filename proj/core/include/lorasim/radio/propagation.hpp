#pragma once

#include <map>
#include <utility>
#include <vector>

#include "lorasim/sim/kernel.hpp"
#include "lorasim/sim/rng.hpp"

namespace lorasim::radio {

struct NodePosition {
  NodeId node = 0;
  double x = 0, y = 0, z = 0;
};

double distance_m(const NodePosition& a, const NodePosition& b);

/// Log-distance path loss with optional log-normal shadowing frozen per link.
struct PathLossModel {
  double exponent = 2.7;
  double reference_loss_db = 40.0;
  double reference_distance_m = 1.0;
  double shadowing_sigma_db = 3.0;
};

/// rssi = P_tx - PL(d0) - 10 n log10(d / d0) + shadowing.
/// Throws std::invalid_argument for coincident positions.
double rssi_at(const NodePosition& tx, const NodePosition& rx, double tx_power_dbm, const PathLossModel& model,
               double shadowing_db = 0.0);

/// Per-unordered-pair shadowing offsets, drawn once at scenario start.
class LinkTable {
 public:
  LinkTable() = default;
  LinkTable(const std::vector<NodePosition>& nodes, const PathLossModel& model, sim::RngStream* shadowing);

  double rssi(NodeId tx, NodeId rx, double tx_power_dbm) const;
  double shadowing(NodeId a, NodeId b) const;

 private:
  PathLossModel model_;
  std::map<NodeId, NodePosition> positions_;
  std::map<std::pair<NodeId, NodeId>, double> shadowing_;
};

}  // namespace lorasim::radio
