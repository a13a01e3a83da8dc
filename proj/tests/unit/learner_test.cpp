#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "pblab/learner.hpp"

using namespace pblab;

namespace {

SystemConfig config(long tau, double p, DemandModel d) {
  SystemConfig c;
  c.demand = std::move(d);
  c.tau = tau;
  c.r = 4;
  c.h = 1;
  c.p = p;
  return c;
}

ArmStats fresh(const ArmGrid& g) {
  ArmStats st;
  st.phi.assign(g.size(), 1);
  st.T.assign(g.size(), 1);
  st.mean.assign(g.size(), 0.0);
  return st;
}

}  // namespace

TEST_CASE("neighborhoods") {
  ArmGrid g{6, 2, 0.0, 0.0};
  ArmStats st = fresh(g);
  CHECK(neighborhood(g, g.index(3, 1), 0, st) == std::vector<std::size_t>{g.index(3, 1)});

  g.eps1 = g.eps2 = 64.0;
  CHECK(neighborhood(g, g.index(3, 1), 0, st).size() == g.size());
  st.T[g.index(0, 0)] = 9;
  st.T[g.index(3, 1)] = 5;
  // only arms explored at least as long as the center survive
  const auto nb = neighborhood(g, g.index(3, 1), 0, st);
  CHECK(nb == std::vector<std::size_t>{g.index(0, 0), g.index(3, 1)});

  // radius floor(64 / sqrt(4096)) = 1
  st = fresh(g);
  CHECK(neighborhood(g, g.index(3, 1), 4096, st).size() == 9);
  CHECK(neighborhood(g, g.index(0, 0), 4096, st).size() == 4);
  // radius floor(64 / sqrt(4097)) = 0
  CHECK(neighborhood(g, g.index(3, 1), 4097, st).size() == 1);
}

TEST_CASE("index by hand") {
  ArmGrid g{2, 0, 0.0, 0.0};
  ArmStats st = fresh(g);
  st.mean = {1.0, 2.0, 3.0};
  CHECK(ucb_index(g, 1, st, 0, 0.0, 0.25) == 2.0);
  CHECK(ucb_index(g, 1, st, 0, 5.0, 0.25) == doctest::Approx(2.0 + 5.0 * confidence_bonus(1, 0.25)));
  CHECK(confidence_bonus(1, 0.25) == 1.0);
  CHECK(confidence_bonus(9, 0.5) == doctest::Approx((std::sqrt(16 * std::log(4.0)) + 1) / 9));
  g.eps1 = 1.0;
  CHECK(ucb_index(g, 1, st, 0, 0.0, 0.25) == doctest::Approx(2.0));
  CHECK(ucb_index(g, 0, st, 0, 0.0, 0.25) == doctest::Approx(1.5));
}

TEST_CASE("epoch choices agree with the direct index") {
  const SystemConfig cfg = config(1, 0.5, DemandModel::poisson(3));
  const ArmGrid grid = ArmGrid::experiment_default(cfg);
  for (double scale : {std::nan(""), 1.0}) {
    LearnerOptions lo;
    lo.tuned_scale = scale;
    const LearnerRun full = run_ucb(cfg, grid, 3000, lo, 17);
    const std::size_t upto = std::min<std::size_t>(full.epochs.size() - 1, 40);
    for (std::size_t k = 1; k < upto; ++k) {
      const LearnerRun prefix = run_ucb(cfg, grid, full.epochs[k - 1].eta, lo, 17);
      const EpochRecord& next = full.epochs[k];
      const double H = std::exp(next.log_H);
      const double dl = std::pow(2.0, -2.0 * static_cast<double>(k + 1));
      double best = -INFINITY;
      for (std::size_t i = 0; i < grid.size(); ++i)
        best = std::max(best, ucb_index(grid, i, prefix.stats, prefix.epochs.back().eta, H, dl));
      const double chosen = ucb_index(grid, grid.index(next.s, next.q), prefix.stats, prefix.epochs.back().eta, H, dl);
      CHECK(chosen >= best - 1e-9 * std::max(1.0, std::fabs(best)));
      CHECK(chosen == doctest::Approx(next.index).epsilon(1e-9));
    }
  }
}

TEST_CASE("budget and bookkeeping") {
  const SystemConfig cfg = config(2, 0.3, DemandModel::binomial(6, 0.5));
  const ArmGrid grid = ArmGrid::experiment_default(cfg);
  const LearnerRun run = run_ucb(cfg, grid, 5000, {}, 3);
  CHECK(run.rewards.size() == 5000);
  CHECK(run.epochs.back().eta == 5000);
  long prev = 0;
  for (const EpochRecord& e : run.epochs) {
    CHECK(e.eta - prev <= e.length);
    CHECK(e.T_after <= e.eta - prev);
    if (e.nu != 0) CHECK(e.T_after == e.eta - e.nu + 1);
    prev = e.eta;
  }
  CHECK(run.epochs.front().length == 4);
  const LearnerRun again = run_ucb(cfg, grid, 5000, {}, 3);
  CHECK(again.rewards == run.rewards);
  CHECK(run_ucb(cfg, grid, 0, {}, 3).rewards.empty());
}

TEST_CASE("single-arm and two-arm grids") {
  const SystemConfig cfg = config(0, 0.5, DemandModel::poisson(2));
  const LearnerRun one = run_ucb(cfg, ArmGrid{0, 0, 64, 64}, 100, {}, 1);
  for (const auto& e : one.epochs) CHECK((e.s == 0 && e.q == 0));
  for (double r : one.rewards) CHECK(r == 0.0);

  // (1,0) dominates (0,0): stocking one unit earns r P[D>=1] - h P[D=0] > 0.
  const ArmGrid two{1, 0, 0, 0};
  double share = 0.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const LearnerRun run = run_ucb(cfg, two, 10000, {}, seed);
    long on = 0, prev = 0;
    for (const auto& e : run.epochs) {
      if (e.s == 1) on += e.eta - prev;
      prev = e.eta;
    }
    share += static_cast<double>(on) / 10000.0 / 20.0;
  }
  CHECK(share >= 0.9);
}

TEST_CASE("regret report") {
  LearnerRun run;
  run.rewards = {1.0, 2.0, 3.0, 4.0};
  const RegretReport rep = regret(run, 4.0, {1, 4});
  CHECK(rep.regret[0] == 3.0);
  CHECK(rep.regret[1] == 6.0);
  CHECK(rep.kappa[1] == doctest::Approx(37.5));
  CHECK(rep.average_profit[1] == 2.5);
  CHECK_THROWS_AS(regret(run, 0.0, {1}), std::domain_error);
  CHECK_THROWS(regret(run, 1.0, {5}));
}
