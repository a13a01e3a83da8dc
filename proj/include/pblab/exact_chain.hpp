#pragma once

#include <utility>
#include <vector>

#include "pblab/policies.hpp"
#include "pblab/state.hpp"

namespace pblab {

// Zero-lead-time (I, B) chain under a fixed ordering rule, with the backlog
// truncated at b_max (mass above is lumped onto b_max).
struct ExactChain {
  long i_max = 0;
  long b_max = 0;
  std::vector<std::pair<long, long>> states;  // (I, B) with I*B = 0
  std::vector<double> matrix;                 // row-major, rows sum to 1
  std::vector<double> reward;                 // expected one-period profit per state

  std::size_t size() const { return states.size(); }
  long index(long I, long B) const;
};

ExactChain build_exact_chain(const SystemConfig& cfg, const Policy& policy, long b_max);

// Solves pi P = pi, sum pi = 1.
std::vector<double> stationary_distribution(const ExactChain& chain);

// TV_i = sum_y |P^{i-1}(x, y) - pi(y)| for i = 1..steps, with X_1 = x.
std::vector<double> tv_distances(const ExactChain& chain, const std::vector<double>& pi, long I0, long B0,
                                 long steps);

double stationary_reward(const ExactChain& chain, const std::vector<double>& pi);

// Mass of the stationary distribution on the truncation boundary.
double boundary_mass(const ExactChain& chain, const std::vector<double>& pi);

}  // namespace pblab
