#include "pblab/dp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pblab/kernels.hpp"

namespace pblab {

NonConvergence::NonConvergence(long it, double res)
    : std::runtime_error("value iteration did not converge after " + std::to_string(it) +
                         " iterations (residual " + std::to_string(res) + ")"),
      iterations(it),
      residual(res) {}

DpProblem DpProblem::make(const DemandModel& demand, double r, double h, double alpha, double p) {
  DpProblem pr;
  pr.demand = demand;
  pr.r = r;
  pr.h = h;
  pr.alpha = alpha;
  pr.p = p;
  const long cap = demand.cap();
  const double spread = 3.0 * std::sqrt(static_cast<double>(cap) * p * (1.0 - p));
  pr.x_lo = -(cap + static_cast<long>(std::ceil(spread)));
  pr.x_hi = closed_form_s_alpha(pr) + cap;
  pr.validate();
  return pr;
}

void DpProblem::validate() const {
  if (!(r > 0.0)) throw std::invalid_argument("dp.r: must be positive");
  if (!(h > 0.0)) throw std::invalid_argument("dp.h: must be positive");
  if (!(alpha >= 0.0 && alpha < 1.0)) throw std::invalid_argument("dp.alpha: must lie in [0,1)");
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("dp.p: must lie in [0,1]");
  if (!(x_lo < 0 && x_hi > 0)) throw std::invalid_argument("dp: state range must straddle 0");
}

double profit_Lo(long x, const DpProblem& pr) {
  const auto& pmf = pr.demand.pmf_table();
  const double xp = static_cast<double>(std::max(x, 0L));
  double e = 0.0;
  for (std::size_t k = 0; k < pmf.size(); ++k) {
    const double d = static_cast<double>(k);
    const double xd = static_cast<double>(x);
    e += pmf[k] * (pr.r * std::min(xp, d) - pr.h * std::max(xd - d, 0.0) +
                   pr.alpha * pr.p * pr.r * std::max(d - xd, 0.0));
  }
  return -pr.r * static_cast<double>(std::max(-x, 0L)) + e;
}

std::vector<double> profit_Lo_table(const DpProblem& pr) {
  std::vector<double> out(static_cast<std::size_t>(pr.size()));
  for (long x = pr.x_lo; x <= pr.x_hi; ++x) out[static_cast<std::size_t>(x - pr.x_lo)] = profit_Lo(x, pr);
  return out;
}

namespace {

// Row y: distribution of the next state (y - D)^+ - Binomial((D - y)^+, p),
// with mass below x_lo folded onto x_lo.
std::vector<double> transition_matrix(const DpProblem& pr) {
  const long n = pr.size();
  std::vector<double> m(static_cast<std::size_t>(n * n), 0.0);
  const auto& pmf = pr.demand.pmf_table();
  std::vector<std::vector<double>> binom_cache;
  auto binom = [&](long u) -> const std::vector<double>& {
    if (static_cast<long>(binom_cache.size()) <= u) binom_cache.resize(static_cast<std::size_t>(u) + 1);
    auto& slot = binom_cache[static_cast<std::size_t>(u)];
    if (slot.empty()) slot = binomial_pmf(u, pr.p);
    return slot;
  };
  for (long y = pr.x_lo; y <= pr.x_hi; ++y) {
    double* row = m.data() + (y - pr.x_lo) * n;
    for (std::size_t k = 0; k < pmf.size(); ++k) {
      const long d = static_cast<long>(k);
      if (pmf[k] == 0.0) continue;
      if (d <= y) {
        row[y - d - pr.x_lo] += pmf[k];
        continue;
      }
      const auto& stay = binom(d - y);
      for (std::size_t j = 0; j < stay.size(); ++j) {
        const long z = std::max(-static_cast<long>(j), pr.x_lo);
        row[z - pr.x_lo] += pmf[k] * stay[j];
      }
    }
  }
  return m;
}

void suffix_max(const std::vector<double>& g, std::vector<double>& c) {
  c.resize(g.size());
  double best = -INFINITY;
  for (std::size_t i = g.size(); i-- > 0;) {
    best = std::max(best, g[i]);
    c[i] = best;
  }
}

long smallest_argmax(std::span<const double> v) {
  const double m = *std::max_element(v.begin(), v.end());
  const double tol = 1e-9 * std::max(1.0, std::fabs(m));
  for (std::size_t i = 0; i < v.size(); ++i)
    if (v[i] >= m - tol) return static_cast<long>(i);
  return 0;
}

}  // namespace

ValueTable value_iterate(const DpProblem& pr, double tol, long max_iters) {
  pr.validate();
  if (!(tol > 0.0)) throw std::invalid_argument("tol must be positive");
  const std::size_t n = static_cast<std::size_t>(pr.size());
  const std::vector<double> lo = profit_Lo_table(pr);
  const std::vector<double> trans = transition_matrix(pr);
  ValueTable t;
  t.x_lo = pr.x_lo;
  std::vector<double> c(n, 0.0), next(n), cont(n), g(n);
  for (long it = 1; it <= max_iters; ++it) {
    kernels::matvec(trans.data(), n, n, c.data(), cont.data());
    for (std::size_t i = 0; i < n; ++i) g[i] = lo[i] + pr.alpha * cont[i];
    suffix_max(g, next);
    double res = 0.0;
    for (std::size_t i = 0; i < n; ++i) res = std::max(res, std::fabs(next[i] - c[i]));
    c.swap(next);
    t.residuals.push_back(res);
    t.iterations = it;
    t.residual = res;
    if (res < tol) {
      t.values = c;
      t.post_decision = g;
      t.maximizer = pr.x_lo + smallest_argmax(g);
      return t;
    }
  }
  throw NonConvergence(max_iters, t.residual);
}

long closed_form_s_alpha(const DpProblem& pr) {
  const double margin = (1.0 - pr.alpha * pr.p) * pr.r;
  return pr.demand.quantile(margin / (margin + pr.h));
}

QuasiConcavity verify_quasiconcave(std::span<const double> v, long x_lo) {
  if (v.empty()) throw std::invalid_argument("value table is empty");
  const double m = *std::max_element(v.begin(), v.end());
  const double tol = 1e-9 * std::max(1.0, std::fabs(m));
  const long top = smallest_argmax(v);
  QuasiConcavity q{true, x_lo + top};
  for (long i = 0; i < top; ++i)
    if (v[i + 1] < v[i] - tol) q.ok = false;
  for (std::size_t i = static_cast<std::size_t>(top); i + 1 < v.size(); ++i)
    if (v[i + 1] > v[i] + tol) q.ok = false;
  return q;
}

QuasiConcavity verify_quasiconcave(const ValueTable& t) {
  const QuasiConcavity c = verify_quasiconcave(t.values, t.x_lo);
  QuasiConcavity g = verify_quasiconcave(t.post_decision, t.x_lo);
  g.ok = g.ok && c.ok;
  return g;
}

long greedy_level(const ValueTable& t, long x) {
  const std::size_t from = static_cast<std::size_t>(std::max(x, t.x_lo) - t.x_lo);
  std::span<const double> tail(t.post_decision.data() + from, t.post_decision.size() - from);
  return t.x_lo + static_cast<long>(from) + smallest_argmax(tail);
}

std::vector<AlphaSweepRow> alpha_sweep(const DemandModel& demand, double r, double h, double p,
                                       std::span<const double> alphas) {
  std::vector<AlphaSweepRow> rows;
  for (double a : alphas) {
    const DpProblem pr = DpProblem::make(demand, r, h, a, p);
    rows.push_back({a, value_iterate(pr).maximizer, closed_form_s_alpha(pr)});
  }
  return rows;
}

}  // namespace pblab
