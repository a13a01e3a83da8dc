#pragma once

#include <cstdint>
#include <limits>
#include <ostream>
#include <utility>
#include <vector>

#include "json.hpp"
#include "pblab/state.hpp"

namespace pblab {

struct ArmGrid {
  long s_max = 0;
  long q_max = 0;
  double eps1 = 64.0;
  double eps2 = 64.0;

  std::size_t size() const { return static_cast<std::size_t>((s_max + 1) * (q_max + 1)); }
  std::size_t index(long s, long q) const { return static_cast<std::size_t>(s * (q_max + 1) + q); }
  std::pair<long, long> arm(std::size_t idx) const {
    return {static_cast<long>(idx) / (q_max + 1), static_cast<long>(idx) % (q_max + 1)};
  }
  void validate() const;
  // s_max: 0.99-quantile (Poisson) or support maximum (binomial and others)
  // of the lead-time demand; q_max = 2 tau.
  static ArmGrid experiment_default(const SystemConfig& cfg);
};

struct ArmStats {
  std::vector<long> phi;
  std::vector<long> T;
  std::vector<double> mean;
};

enum class ConfidenceMode { tuned, certificate };

struct LearnerOptions {
  ConfidenceMode mode = ConfidenceMode::tuned;
  // Tuned mode: scale applied from the second epoch on; NaN means 10^{-2 tau}.
  double tuned_scale = std::numeric_limits<double>::quiet_NaN();
  double delta = 0.5;  // certificate mode exponent
};

struct EpochRecord {
  long epoch = 0;
  long s = 0;
  long q = 0;
  long length = 0;  // 2^phi before clipping
  long eta = 0;     // last period of the epoch
  long nu = 0;      // first valid period, 0 if none
  long T_after = 0;
  double mean_after = 0.0;
  double index = 0.0;
  double log_H = 0.0;  // confidence scale used for the indices of this epoch
};

struct LearnerRun {
  ArmGrid grid;
  long horizon = 0;
  double period0_reward = 0.0;
  std::vector<EpochRecord> epochs;
  std::vector<double> rewards;  // periods 1..N
  ArmStats stats;
};

// Arms in the box around `arm` whose T is at least T(arm).
std::vector<std::size_t> neighborhood(const ArmGrid& grid, std::size_t arm, long eta_prev, const ArmStats& stats);
// Direct evaluation of the index; H = 0 gives the neighborhood mean.
double ucb_index(const ArmGrid& grid, std::size_t arm, const ArmStats& stats, long eta_prev, double H,
                 double delta_l);
double confidence_bonus(long T, double delta_l);

LearnerRun run_ucb(const SystemConfig& cfg, const ArmGrid& grid, long N, const LearnerOptions& opts,
                   std::uint64_t seed);

struct RegretReport {
  double benchmark = 0.0;
  std::vector<long> checkpoints;
  std::vector<double> regret;
  std::vector<double> kappa;
  std::vector<double> average_profit;
  nlohmann::json to_json() const;
};

// Throws std::domain_error if benchmark <= 0.
RegretReport regret(const LearnerRun& run, double benchmark, const std::vector<long>& checkpoints);

void write_run_log_csv(std::ostream& os, const LearnerRun& run, double benchmark);

}  // namespace pblab
