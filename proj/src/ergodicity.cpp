#include "pblab/ergodicity.hpp"

#include <algorithm>
#include <stdexcept>

#include "pblab/policies.hpp"
#include "pblab/sim.hpp"

namespace pblab {

double log_sum_exp(double a, double b) {
  if (a == -INFINITY) return b;
  if (b == -INFINITY) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(-std::fabs(a - b)));
}

namespace {

double softplus(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

void check_delta(double delta) {
  if (!(delta > 0.0 && delta <= 1.0)) throw std::invalid_argument("delta must lie in (0,1]");
}

}  // namespace

double lyapunov(long backlog, double p, double delta) {
  check_delta(delta);
  if (backlog < 0) throw std::invalid_argument("backlog must be nonnegative");
  return p * std::pow(static_cast<double>(backlog), delta) + 1.0;
}

DriftConstants drift_constants(double p, double delta, const DemandModel& demand, long s, long q, long tau) {
  check_delta(delta);
  if (!(p >= 0.0 && p < 1.0)) throw std::domain_error("ergodicity constants need 0 <= p < 1");
  if (!(demand.alpha0() > 0.0)) throw std::domain_error("ergodicity constants need P[D=0] > 0");
  if (!(demand.alpha1() > 0.0)) throw std::domain_error("ergodicity constants need P[D=1] > 0");
  if (s < 0 || q < 0 || tau < 0) throw std::invalid_argument("s, q, tau must be nonnegative");
  DriftConstants c;
  c.p = p;
  c.delta = delta;
  c.alpha0 = demand.alpha0();
  const double pd = std::pow(p, delta);
  const double d = demand.mean();
  c.lambda0 = 1.0 - 0.25 * (1.0 - pd);
  c.kappa = p * d / (std::pow((1.0 + pd) / 2.0, 1.0 / delta) - p);
  c.b0 = p * std::pow(std::floor(c.kappa) + d, delta) + 1.0;
  c.L = 3 + tau + q;
  c.log_zeta = static_cast<double>(tau + 2) * std::log(demand.alpha0()) + c.kappa * std::log1p(-p) +
               static_cast<double>(q) * std::log(std::min(demand.alpha0(), demand.alpha1()));
  if (!(c.lambda0 > 0.0 && c.lambda0 < 1.0)) throw std::logic_error("lambda0 outside (0,1)");
  if (!(c.log_zeta <= 0.0)) throw std::logic_error("zeta outside (0,1]");
  return c;
}

ErgodicityRates ergodicity_rates_log(double lambda0, double b0, long L, double log_zeta, double alpha0) {
  if (!(lambda0 > 0.0 && lambda0 < 1.0)) throw std::invalid_argument("lambda0 must lie in (0,1)");
  if (!(b0 > 0.0) || L < 1 || !(log_zeta <= 0.0) || !(alpha0 > 0.0 && alpha0 <= 1.0))
    throw std::invalid_argument("invalid ergodicity inputs");
  const double lL2 = 2.0 * std::log(static_cast<double>(L));
  const double lb0 = std::log(b0);
  ErgodicityRates r;
  r.log_beta = lb0 + static_cast<double>(L) * softplus(lL2 - log_zeta);
  // log(L^2 + zeta^2)
  const double l_base = log_sum_exp(lL2, 2.0 * log_zeta);
  double log_prod = 0.0;
  for (long k = 0; k < L; ++k) log_prod += softplus(lb0 + lL2 - 2.0 * log_zeta + static_cast<double>(k) * l_base);
  r.log_one_minus_lambda = std::log1p(-lambda0) - log_prod;
  const double a = r.log_one_minus_lambda;
  const double lb = r.log_beta;
  const double lc = std::log(32.0 - 8.0 * alpha0 * alpha0) - 3.0 * std::log(alpha0);
  double denom = log_sum_exp(a, lb);
  denom = log_sum_exp(denom, 2.0 * lb);
  denom = log_sum_exp(denom, lc + 3.0 * lb - 2.0 * a + log_sum_exp(a, lb));
  r.log_one_minus_theta = 2.0 * a - denom;
  if (!(r.log_one_minus_lambda < 0.0) || !std::isfinite(r.log_one_minus_lambda))
    throw std::logic_error("lambda outside (0,1)");
  if (!(r.log_one_minus_theta < 0.0) || !std::isfinite(r.log_one_minus_theta))
    throw std::logic_error("theta outside (0,1)");
  if (!std::isfinite(r.log_beta) || !(r.log_beta > -INFINITY)) throw std::logic_error("beta not positive and finite");
  return r;
}

ErgodicityRates ergodicity_rates(double lambda0, double b0, long L, double zeta, double alpha0) {
  if (!(zeta > 0.0 && zeta <= 1.0)) throw std::invalid_argument("zeta must lie in (0,1]");
  return ergodicity_rates_log(lambda0, b0, L, std::log(zeta), alpha0);
}

ConcentrationCoeffs concentration_coeffs(double r, long s, long q, const ErgodicityRates& rates, double lambda0,
                                         double b0, long cap, double delta, double p, long initial_backlog) {
  check_delta(delta);
  ConcentrationCoeffs c;
  if (s + q == 0) return c;
  const double common = std::log(r) + std::log(static_cast<double>(s + q)) + std::log(1.0 + lambda0 + b0) +
                        softplus(rates.log_beta) + 2.0 * rates.log_rho() - 2.0 * rates.log_one_minus_rho();
  c.log_chi1 = common + std::log1p(p * std::pow(static_cast<double>(initial_backlog), delta));
  if (p > 0.0) c.log_chi2 = std::log(p) + common + delta * std::log(static_cast<double>(cap));
  return c;
}

double concentration_bound(long N, double delta_N, double chi1, double chi2, double delta) {
  if (N < 2) throw std::invalid_argument("N must be at least 2");
  if (!(delta_N > 0.0 && delta_N < 1.0)) throw std::invalid_argument("delta_N must lie in (0,1)");
  const double n = static_cast<double>(N);
  return (chi1 + chi2 * std::pow(n, delta)) * (1.0 + std::sqrt(2.0 * (n - 1.0) * std::log(2.0 / delta_N)));
}

double ErgodicityCertificate::log_tv_bound(long backlog, long i) const {
  return std::log(lyapunov(backlog, drift.p, drift.delta)) + softplus(rates.log_beta) +
         static_cast<double>(i + 1) * rates.log_rho() - rates.log_one_minus_rho();
}

nlohmann::json ErgodicityCertificate::to_json() const {
  // Quantities that leave double range are reported through their logs.
  return {{"s", s},
          {"q", q},
          {"tau", tau},
          {"delta", drift.delta},
          {"p", drift.p},
          {"lambda0", drift.lambda0},
          {"b0", drift.b0},
          {"L", drift.L},
          {"kappa", drift.kappa},
          {"log_zeta", drift.log_zeta},
          {"log_one_minus_lambda", rates.log_one_minus_lambda},
          {"log_beta", rates.log_beta},
          {"log_one_minus_theta", rates.log_one_minus_theta},
          {"log_one_minus_rho", rates.log_one_minus_rho()},
          {"log_chi1", chi.log_chi1},
          {"log_chi2", chi.log_chi2 == -INFINITY ? nlohmann::json(nullptr) : nlohmann::json(chi.log_chi2)}};
}

ErgodicityCertificate make_certificate(const SystemConfig& cfg, long s, long q, double delta) {
  ErgodicityCertificate c;
  c.s = s;
  c.q = q;
  c.tau = cfg.tau;
  c.r = cfg.r;
  c.drift = drift_constants(cfg.p, delta, cfg.demand, s, q, cfg.tau);
  c.rates = ergodicity_rates_log(c.drift.lambda0, c.drift.b0, c.drift.L, c.drift.log_zeta, c.drift.alpha0);
  c.chi = concentration_coeffs(cfg.r, s, q, c.rates, c.drift.lambda0, c.drift.b0, cfg.demand.cap(), delta, cfg.p, 0);
  return c;
}

nlohmann::json DriftReport::to_json() const {
  return {{"applicable", applicable}, {"pass", pass}, {"threshold", threshold}, {"mean_drift", mean_drift},
          {"ci_upper", ci_upper}, {"theoretical", theoretical}, {"reps", reps}, {"note", note}};
}

DriftReport empirical_drift_check(const SystemConfig& cfg, long s, long q, const SystemState& start, DriftMode mode,
                                  double delta, long reps, std::uint64_t seed) {
  check_delta(delta);
  cfg.validate();
  start.validate(cfg.tau);
  if (reps < 2) throw std::invalid_argument("reps must be at least 2");
  DriftReport rep;
  rep.reps = reps;
  const double p = cfg.p;
  if (p == 0.0) {
    rep.pass = true;
    rep.note = "p = 0: Lyapunov function is constant, check is vacuous";
    return rep;
  }
  if (p >= 1.0) throw std::domain_error("drift check needs p < 1");
  const double pd = std::pow(p, delta);
  const double v0 = lyapunov(start.B, p, delta);
  long steps = 1;
  if (mode == DriftMode::one_step) {
    rep.threshold = p * cfg.demand.mean() / (std::pow((1.0 + pd) / 2.0, 1.0 / delta) - p);
    rep.applicable = static_cast<double>(start.B) > rep.threshold;
    rep.theoretical = -0.25 * (1.0 - pd) * v0;
  } else {
    const double excess = std::max(0.0, static_cast<double>(cfg.tau + 1) * cfg.demand.mean() - static_cast<double>(s + q));
    const double scaled = std::floor(2.0 * p / std::pow(1.0 - pd, 1.0 / delta) * excess) + 1.0;
    rep.threshold = std::max(static_cast<double>(s + q), scaled);
    rep.applicable = static_cast<double>(start.B) >= rep.threshold;
    rep.theoretical = -0.5 * (1.0 - (1.0 + (std::pow(2.0, delta) - 1.0) * pd) / std::pow(2.0, delta)) * v0;
    steps = cfg.tau + 1;
  }
  if (!rep.applicable) {
    rep.note = "start backlog inside the small set: not applicable";
    return rep;
  }
  const Policy policy = Policy::sq(s, q);
  Rng demand(seed, stream_id(0, StreamKind::demand));
  Rng patience(seed, stream_id(0, StreamKind::patience));
  double sum = 0.0, sumsq = 0.0;
  for (long k = 0; k < reps; ++k) {
    SystemState st = start;
    run_periods(cfg, policy, steps, st, demand, patience, [](const PeriodOutcome&) {});
    const double diff = lyapunov(st.B, p, delta) - v0;
    sum += diff;
    sumsq += diff * diff;
  }
  const double n = static_cast<double>(reps);
  rep.mean_drift = sum / n;
  const double var = std::max(0.0, (sumsq - n * rep.mean_drift * rep.mean_drift) / (n - 1.0));
  rep.ci_upper = rep.mean_drift + 2.5758293035489 * std::sqrt(var / n);
  rep.pass = rep.ci_upper <= rep.theoretical;
  return rep;
}

}  // namespace pblab
