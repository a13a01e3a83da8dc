#pragma once

#include <vector>

#include "json.hpp"
#include "pblab/demand.hpp"

namespace pblab {

struct SystemConfig {
  DemandModel demand = DemandModel::categorical({1.0});
  long tau = 0;
  double r = 1.0;
  double h = 1.0;
  double p = 1.0;  // per-period probability that a backlogged customer stays
  double b = 0.0;  // backorder cost, used only by the full-backlog evaluation

  void validate() const;
  static SystemConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
  SystemConfig with_patience(double stay) const;
};

// (on-hand, hidden backlog, pipeline oldest first). The pipeline holds exactly
// tau entries; its head arrives in the current period.
struct SystemState {
  long I = 0;
  long B = 0;
  std::vector<long> pipeline;

  long pipeline_sum() const;
  long inventory_position() const { return I + pipeline_sum() - B; }
  void validate(long tau) const;
  bool operator==(const SystemState&) const = default;

  static SystemState start(long tau, long on_hand);
  static SystemState from_json(const nlohmann::json& j, long tau);
};

}  // namespace pblab
