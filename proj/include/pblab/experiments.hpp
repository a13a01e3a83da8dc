#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "pblab/eval.hpp"
#include "pblab/learner.hpp"

namespace pblab {

// Coarse pass over all candidates on a shortened horizon, then the full
// evaluation on the best few.
struct SearchOptions {
  long coarse_horizon = 20'000;
  long coarse_burn_in = 2'000;
  long coarse_replications = 2;
  std::size_t refine_top = 5;
};

struct SearchResult {
  Policy best = Policy::base_stock(0);
  EvalReport report;
  std::size_t evaluated = 0;
};

SearchResult search_policies(const SystemConfig& cfg, const std::vector<Policy>& candidates, const EvalConfig& ec,
                             const SearchOptions& opts = {});

// Levels bracketing the best base-stock level: newsvendor levels for the
// reduced and the full backorder cost, widened by `margin`.
std::pair<long, long> base_stock_window(const SystemConfig& cfg, long margin = 2);

struct BaseStockRow {
  SystemConfig cfg;
  long s_star = 0;
  long sbar_star = 0;
  EvalReport at_s_star;
  EvalReport at_sbar_star;
  GapReport gap;
  double rel_diff = 0.0;  // 100 (1 - C(sbar*) / C(s*))
  nlohmann::json to_json() const;
};

BaseStockRow base_stock_row(const SystemConfig& cfg, const EvalConfig& ec, std::optional<long> s_star = std::nullopt,
                            const SearchOptions& opts = {});

struct SqRow {
  SystemConfig cfg;
  long s_o = 0;
  long q_o = 0;
  long s_star = 0;
  double C_sq = 0.0;
  double C_s = 0.0;
  double B_s_star = 0.0;
  double rel_diff = 0.0;  // 100 (1 - C(s_o, q_o) / C(s*))
  bool exact = false;     // tau = 0 rows come from the exact chain
  nlohmann::json to_json() const;
};

// Zero lead time: exact long-run averages from the (I, B) chain.
double exact_long_run_average(const SystemConfig& cfg, const Policy& policy, long b_max = -1);
double exact_mean_backlog(const SystemConfig& cfg, const Policy& policy, long b_max = -1);

SqRow sq_row(const SystemConfig& cfg, const EvalConfig& ec, long q_max = 4, const SearchOptions& opts = {});

struct LearnerRow {
  SystemConfig cfg;
  ArmGrid grid;
  Policy benchmark_policy = Policy::sq(0, 0);
  double benchmark = 0.0;
  std::vector<long> checkpoints;
  std::vector<double> average_profit;  // seed averages
  std::vector<double> kappa;
  std::vector<double> kappa_se;
  long seeds = 0;
  nlohmann::json to_json() const;
};

SearchResult learner_benchmark(const SystemConfig& cfg, const ArmGrid& grid, const EvalConfig& ec,
                               const SearchOptions& opts = {});
LearnerRow learner_row(const SystemConfig& cfg, const ArmGrid& grid, const SearchResult& benchmark,
                       const std::vector<long>& checkpoints, long seeds, const LearnerOptions& lo,
                       std::uint64_t base_seed);

// Seed for one table cell: base XOR hash of the cell's canonical parameters.
std::uint64_t cell_seed(std::uint64_t base, const SystemConfig& cfg);

}  // namespace pblab
