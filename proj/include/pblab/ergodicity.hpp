#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include "json.hpp"
#include "pblab/demand.hpp"
#include "pblab/state.hpp"

namespace pblab {

// V(x) = p * x2^delta + 1, with x2 the backlog coordinate.
double lyapunov(long backlog, double p, double delta);

struct DriftConstants {
  double p = 0.0;
  double delta = 0.5;
  double lambda0 = 0.0;
  double b0 = 0.0;
  long L = 0;
  double log_zeta = 0.0;  // zeta itself underflows for realistic instances
  double kappa = 0.0;     // backlog threshold of the small set
  double alpha0 = 0.0;
  double zeta() const { return std::exp(log_zeta); }
};

// Throws std::domain_error when p = 1, P[D=0] = 0 or P[D=1] = 0.
DriftConstants drift_constants(double p, double delta, const DemandModel& demand, long s, long q, long tau);

// Rates are kept through their complements in log space: 1 - lambda and
// 1 - theta are routinely far below double epsilon.
struct ErgodicityRates {
  double log_one_minus_lambda = 0.0;
  double log_beta = 0.0;
  double log_one_minus_theta = 0.0;

  double lambda() const { return -std::expm1(log_one_minus_lambda); }
  double beta() const { return std::exp(log_beta); }
  double theta() const { return -std::expm1(log_one_minus_theta); }
  // rho = (1 + theta) / 2, so 1 - rho = rho - theta = (1 - theta) / 2.
  double log_one_minus_rho() const { return log_one_minus_theta - std::log(2.0); }
  double log_rho() const { return std::log1p(-std::exp(log_one_minus_rho())); }
  double rho() const { return -std::expm1(log_one_minus_rho()); }
};

// Throws std::logic_error if a rate falls outside its interval.
ErgodicityRates ergodicity_rates(double lambda0, double b0, long L, double zeta, double alpha0);
ErgodicityRates ergodicity_rates_log(double lambda0, double b0, long L, double log_zeta, double alpha0);

struct ConcentrationCoeffs {
  double log_chi1 = -INFINITY;
  double log_chi2 = -INFINITY;
  double chi1() const { return std::exp(log_chi1); }
  double chi2() const { return std::exp(log_chi2); }
};

ConcentrationCoeffs concentration_coeffs(double r, long s, long q, const ErgodicityRates& rates, double lambda0,
                                         double b0, long cap, double delta, double p, long initial_backlog = 0);

// (chi1 + chi2 N^delta)(1 + sqrt(2 (N-1) ln(2/delta_N))).
double concentration_bound(long N, double delta_N, double chi1, double chi2, double delta);

struct ErgodicityCertificate {
  long s = 0;
  long q = 0;
  long tau = 0;
  double r = 0.0;
  DriftConstants drift;
  ErgodicityRates rates;
  ConcentrationCoeffs chi;

  // log of V(x)(1+beta) rho^{i+1} / (rho - theta).
  double log_tv_bound(long backlog, long i) const;
  nlohmann::json to_json() const;
};

ErgodicityCertificate make_certificate(const SystemConfig& cfg, long s, long q, double delta);

enum class DriftMode { one_step, multi_step };

struct DriftReport {
  bool applicable = false;
  bool pass = false;
  double threshold = 0.0;
  double mean_drift = 0.0;
  double ci_upper = 0.0;
  double theoretical = 0.0;
  long reps = 0;
  std::string note;
  nlohmann::json to_json() const;
};

// Monte Carlo estimate of E[V(X_{1+k})] - V(x) from a fixed start, k = 1 or
// tau + 1, compared with the theoretical negative drift via a 99% upper bound.
DriftReport empirical_drift_check(const SystemConfig& cfg, long s, long q, const SystemState& start, DriftMode mode,
                                  double delta, long reps, std::uint64_t seed);

double log_sum_exp(double a, double b);

}  // namespace pblab
