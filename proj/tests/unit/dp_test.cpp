#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "pblab/dp.hpp"

using namespace pblab;

namespace {

// Plain value iteration with explicit loops over demand and survivors.
std::vector<double> naive_values(const DpProblem& pr, long iters) {
  const long n = pr.size();
  const auto& pmf = pr.demand.pmf_table();
  std::vector<double> c(static_cast<std::size_t>(n), 0.0), g(c.size());
  auto at = [&](std::vector<double>& v, long x) -> double& { return v[static_cast<std::size_t>(x - pr.x_lo)]; };
  for (long it = 0; it < iters; ++it) {
    for (long y = pr.x_lo; y <= pr.x_hi; ++y) {
      double val = -pr.r * std::max(-y, 0L);
      for (long d = 0; d < static_cast<long>(pmf.size()); ++d) {
        const double pd = pmf[static_cast<std::size_t>(d)];
        val += pd * (pr.r * std::min(std::max(y, 0L), d) - pr.h * std::max(y - d, 0L) +
                     pr.alpha * pr.p * pr.r * std::max(d - y, 0L));
        const long u = std::max(d - y, 0L);
        const long left = std::max(y - d, 0L);
        for (long k = 0; k <= u; ++k) {
          const double pk = std::exp(std::lgamma(u + 1.0) - std::lgamma(k + 1.0) - std::lgamma(u - k + 1.0)) *
                            std::pow(pr.p, k) * std::pow(1 - pr.p, u - k);
          const long next = std::max(left - k, pr.x_lo);
          val += pr.alpha * pd * pk * at(c, next);
        }
      }
      at(g, y) = val;
    }
    double run = -INFINITY;
    for (long x = pr.x_hi; x >= pr.x_lo; --x) at(c, x) = run = std::max(run, at(g, x));
  }
  return c;
}

}  // namespace

TEST_CASE("value iteration matches a naive oracle") {
  const DemandModel d = DemandModel::categorical({0.2, 0.5, 0.3});
  for (double p : {0.0, 0.4, 1.0}) {
    const DpProblem pr = DpProblem::make(d, 5, 1, 0.9, p);
    const ValueTable t = value_iterate(pr, 1e-12, 100000);
    const std::vector<double> ref = naive_values(pr, t.iterations);
    for (long x = pr.x_lo; x <= pr.x_hi; ++x)
      CHECK(t.value(x) == doctest::Approx(ref[static_cast<std::size_t>(x - pr.x_lo)]).epsilon(1e-9));
    CHECK(t.maximizer == closed_form_s_alpha(pr));
  }
}

TEST_CASE("maximizer equals the closed form and G is quasiconcave") {
  for (double r : {2.0, 8.0, 32.0})
    for (double p : {0.0, 0.3, 0.7, 1.0}) {
      const DpProblem pr = DpProblem::make(DemandModel::poisson(10), r, 1, 0.95, p);
      const ValueTable t = value_iterate(pr, 1e-9);
      CHECK(t.maximizer == closed_form_s_alpha(pr));
      const QuasiConcavity q = verify_quasiconcave(t);
      CHECK(q.ok);
      CHECK(q.argmax == t.maximizer);
      CHECK(greedy_level(t, pr.x_lo) == t.maximizer);
      CHECK(greedy_level(t, t.maximizer + 3) == t.maximizer + 3);
    }
}

TEST_CASE("residuals contract") {
  const DpProblem pr = DpProblem::make(DemandModel::binomial(10, 0.5), 4, 1, 0.8, 0.5);
  const ValueTable t = value_iterate(pr, 1e-10);
  for (std::size_t i = 1; i < t.residuals.size(); ++i) CHECK(t.residuals[i] <= t.residuals[i - 1] * 0.8 + 1e-12);
  CHECK_THROWS_AS(value_iterate(pr, 1e-10, 1), NonConvergence);
}

TEST_CASE("quasiconcavity checker") {
  const std::vector<double> good{1, 2, 3, 3, 2, 0};
  const QuasiConcavity a = verify_quasiconcave(good, -2);
  CHECK(a.ok);
  CHECK(a.argmax == 0);
  const std::vector<double> bad{1, 3, 2, 3, 1};
  CHECK_FALSE(verify_quasiconcave(bad, 0).ok);
  const std::vector<double> flat{5, 5, 5};
  CHECK(verify_quasiconcave(flat, 0).ok);
  CHECK_THROWS(verify_quasiconcave(std::vector<double>{}, 0));
}

TEST_CASE("closed form and alpha sweep") {
  DpProblem pr = DpProblem::make(DemandModel::poisson(10), 4, 1, 0.5, 0.0);
  CHECK(closed_form_s_alpha(pr) == DemandModel::poisson(10).quantile(0.8));
  const std::vector<double> alphas{0.5, 0.9, 0.99};
  for (const auto& row : alpha_sweep(DemandModel::poisson(10), 8, 1, 0.7, alphas)) CHECK(row.maximizer == row.closed_form);
  CHECK_THROWS(DpProblem::make(DemandModel::poisson(10), 4, 1, 1.0, 0.5));
}
