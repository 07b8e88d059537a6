#include "lorasim/radio/propagation.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace lorasim::radio {

double distance_m(const NodePosition& a, const NodePosition& b) {
  return std::hypot(a.x - b.x, a.y - b.y, a.z - b.z);
}

double rssi_at(const NodePosition& tx, const NodePosition& rx, double tx_power_dbm, const PathLossModel& model,
               double shadowing_db) {
  const double d = distance_m(tx, rx);
  if (d <= 0.0) {
    throw std::invalid_argument("zero distance between node " + std::to_string(tx.node) + " and node " +
                                std::to_string(rx.node));
  }
  return tx_power_dbm - model.reference_loss_db -
         10.0 * model.exponent * std::log10(d / model.reference_distance_m) + shadowing_db;
}

LinkTable::LinkTable(const std::vector<NodePosition>& nodes, const PathLossModel& model, sim::RngStream* shadowing)
    : model_(model) {
  for (const auto& n : nodes) positions_[n.node] = n;
  for (auto a = positions_.begin(); a != positions_.end(); ++a) {
    for (auto b = std::next(a); b != positions_.end(); ++b) {
      if (distance_m(a->second, b->second) <= 0.0) {
        throw std::invalid_argument("nodes " + std::to_string(a->first) + " and " + std::to_string(b->first) +
                                    " share a position");
      }
      const double offset =
          (shadowing != nullptr && model.shadowing_sigma_db > 0.0) ? model.shadowing_sigma_db * shadowing->normal() : 0.0;
      shadowing_[{a->first, b->first}] = offset;
    }
  }
}

double LinkTable::shadowing(NodeId a, NodeId b) const {
  const auto key = a < b ? std::pair{a, b} : std::pair{b, a};
  auto it = shadowing_.find(key);
  return it == shadowing_.end() ? 0.0 : it->second;
}

double LinkTable::rssi(NodeId tx, NodeId rx, double tx_power_dbm) const {
  return rssi_at(positions_.at(tx), positions_.at(rx), tx_power_dbm, model_, shadowing(tx, rx));
}

}  // namespace lorasim::radio
