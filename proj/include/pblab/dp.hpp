#pragma once

#include <span>
#include <stdexcept>
#include <vector>

#include "pblab/demand.hpp"

namespace pblab {

// Discounted problem for the zero lead-time system on net-inventory states
// [x_lo, x_hi]. Values below x_lo are held flat: once the order-up-to level
// is above x_lo, any deeper state reaches the same maximum.
struct DpProblem {
  DemandModel demand = DemandModel::categorical({1.0});
  double r = 1.0;
  double h = 1.0;
  double alpha = 0.99;
  double p = 0.0;
  long x_lo = -1;
  long x_hi = 1;

  static DpProblem make(const DemandModel& demand, double r, double h, double alpha, double p);
  void validate() const;
  long size() const { return x_hi - x_lo + 1; }
};

struct ValueTable {
  long x_lo = 0;
  std::vector<double> values;         // C(x) = max_{y >= x} G(y)
  std::vector<double> post_decision;  // G(y): one-period profit plus discounted continuation
  std::vector<double> residuals;      // sup-norm change per iteration
  long iterations = 0;
  double residual = 0.0;
  long maximizer = 0;  // smallest argmax of G, the order-up-to level

  long x_hi() const { return x_lo + static_cast<long>(values.size()) - 1; }
  double value(long x) const { return values.at(static_cast<std::size_t>(x - x_lo)); }
  double post(long y) const { return post_decision.at(static_cast<std::size_t>(y - x_lo)); }
};

class NonConvergence : public std::runtime_error {
 public:
  NonConvergence(long iterations, double residual);
  long iterations;
  double residual;
};

double profit_Lo(long x, const DpProblem& problem);
std::vector<double> profit_Lo_table(const DpProblem& problem);

ValueTable value_iterate(const DpProblem& problem, double tol = 1e-8, long max_iters = 100'000);

// min{x : P[D <= x] >= (1 - alpha p) r / ((1 - alpha p) r + h)}; alpha = 1 allowed.
long closed_form_s_alpha(const DpProblem& problem);

struct QuasiConcavity {
  bool ok = false;
  long argmax = 0;
};

// Nondecreasing up to a single argmax plateau, nonincreasing after. Values
// within 1e-9 relative of each other count as equal.
QuasiConcavity verify_quasiconcave(std::span<const double> values, long x_lo);
// Checks both C and G; reports the argmax of G.
QuasiConcavity verify_quasiconcave(const ValueTable& table);

// Order-up-to target chosen by the greedy policy at state x.
long greedy_level(const ValueTable& table, long x);

struct AlphaSweepRow {
  double alpha = 0.0;
  long maximizer = 0;
  long closed_form = 0;
};
std::vector<AlphaSweepRow> alpha_sweep(const DemandModel& demand, double r, double h, double p,
                                       std::span<const double> alphas);

}  // namespace pblab
