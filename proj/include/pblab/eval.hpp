#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "json.hpp"
#include "pblab/policies.hpp"
#include "pblab/state.hpp"

namespace pblab {

struct EvalConfig {
  long horizon = 200'000;
  long burn_in = 20'000;
  long replications = 20;
  std::uint64_t seed = 1;
  bool crn = true;

  void validate() const;
  static EvalConfig from_json(const nlohmann::json& j, std::uint64_t seed);
  nlohmann::json to_json() const;
};

struct EvalReport {
  double mean = 0.0;
  double se = 0.0;
  std::vector<double> per_replication;
  double mean_backlog = 0.0;
  double mean_lost = 0.0;
  double mean_overshoot = 0.0;
};

// Raised when the bounding systems have no economic content.
class DegenerateEconomics : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct GapReport {
  long level_lower = 0;  // newsvendor level with backorder cost r + tau h
  long level_upper = 0;  // newsvendor level with the reduced backorder cost
  double b_lower = 0.0;
  double b_upper = 0.0;
  double overshoot = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  double gap_percent = 0.0;
};

struct GridCandidate {
  Policy policy;
  EvalReport report;
};

struct GridResult {
  std::size_t best = 0;
  std::vector<GridCandidate> candidates;
  const Policy& best_policy() const { return candidates.at(best).policy; }
  const EvalReport& best_report() const { return candidates.at(best).report; }
};

// Starting state used by the evaluators: on-hand at the policy level, empty pipeline.
SystemState eval_start_state(const SystemConfig& cfg, const Policy& policy);

EvalReport long_run_average(const SystemConfig& cfg, const Policy& policy, const EvalConfig& ec);

// r E[D] - h E(s - W)^+ - b E(W - s)^+ with W the (tau+1)-period demand.
double b_system_closed_form(const DemandModel& demand, long tau, double r, double h, double b, long s);
// h E(s - W)^+ + b E(W - s)^+ for a precomputed lead-time distribution W.
double b_system_penalty(const DemandModel& lead_time, double h, double b, long s);

GapReport optimality_gap(const SystemConfig& cfg, double overshoot_estimate);
double long_run_overshoot(const SystemConfig& cfg, long s, const EvalConfig& ec);

GridResult grid_search_levels(const SystemConfig& cfg, const std::vector<Policy>& candidates,
                              const EvalConfig& ec);
std::vector<Policy> base_stock_candidates(long s_lo, long s_hi);
std::vector<Policy> sq_candidates(long s_lo, long s_hi, long q_lo, long q_hi);

}  // namespace pblab
