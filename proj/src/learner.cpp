#include "pblab/learner.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "pblab/ergodicity.hpp"
#include "pblab/policies.hpp"
#include "pblab/sim.hpp"

namespace pblab {

void ArmGrid::validate() const {
  if (s_max < 0 || q_max < 0) throw std::invalid_argument("grid bounds must be nonnegative");
  if (!(eps1 >= 0.0) || !(eps2 >= 0.0)) throw std::invalid_argument("neighborhood radii must be nonnegative");
}

ArmGrid ArmGrid::experiment_default(const SystemConfig& cfg) {
  const DemandModel lead = lead_time_demand(cfg.demand, cfg.tau + 1);
  ArmGrid g;
  g.s_max = cfg.demand.family() == DemandFamily::poisson ? lead.quantile(0.99) : lead.cap();
  g.q_max = 2 * cfg.tau;
  return g;
}

double confidence_bonus(long T, double delta_l) {
  const double t = static_cast<double>(T);
  return (std::sqrt(2.0 * (t - 1.0) * std::log(2.0 / delta_l)) + 1.0) / t;
}

namespace {

long box_radius(double eps, long eta_prev) {
  const double scale = std::max(1.0, std::sqrt(static_cast<double>(eta_prev)));
  return static_cast<long>(std::floor(eps / scale * (1.0 + 1e-12)));
}

}  // namespace

std::vector<std::size_t> neighborhood(const ArmGrid& grid, std::size_t arm, long eta_prev, const ArmStats& stats) {
  const auto [s, q] = grid.arm(arm);
  const long rs = box_radius(grid.eps1, eta_prev);
  const long rq = box_radius(grid.eps2, eta_prev);
  std::vector<std::size_t> out;
  for (long s2 = std::max(0L, s - rs); s2 <= std::min(grid.s_max, s + rs); ++s2)
    for (long q2 = std::max(0L, q - rq); q2 <= std::min(grid.q_max, q + rq); ++q2) {
      const std::size_t j = grid.index(s2, q2);
      if (stats.T[j] >= stats.T[arm]) out.push_back(j);
    }
  return out;
}

double ucb_index(const ArmGrid& grid, std::size_t arm, const ArmStats& stats, long eta_prev, double H,
                 double delta_l) {
  const auto nb = neighborhood(grid, arm, eta_prev, stats);
  double sum = 0.0;
  for (std::size_t j : nb) {
    sum += stats.mean[j];
    if (H != 0.0) sum += H * confidence_bonus(stats.T[j], delta_l);
  }
  return sum / static_cast<double>(nb.size());
}

namespace {

// Neighborhood means of R and of the bonus for every arm. Arms with T = 1
// see the whole box, served by 2D prefix sums; the rest only see explored arms.
struct IndexParts {
  std::vector<double> mean;
  std::vector<double> bonus;
};

IndexParts index_parts(const ArmGrid& grid, const ArmStats& st, long eta_prev, double delta_l,
                       const std::vector<std::size_t>& explored) {
  const long S = grid.s_max + 1, Q = grid.q_max + 1;
  const long rs = box_radius(grid.eps1, eta_prev);
  const long rq = box_radius(grid.eps2, eta_prev);
  const std::size_t n = grid.size();
  std::vector<double> bonus_of(n);
  for (std::size_t j = 0; j < n; ++j) bonus_of[j] = confidence_bonus(st.T[j], delta_l);
  std::vector<double> pr(static_cast<std::size_t>((S + 1) * (Q + 1)), 0.0), pb(pr.size(), 0.0);
  auto at = [Q](long a, long b) { return static_cast<std::size_t>(a * (Q + 1) + b); };
  for (long a = 0; a < S; ++a)
    for (long b = 0; b < Q; ++b) {
      const std::size_t j = grid.index(a, b);
      pr[at(a + 1, b + 1)] = st.mean[j] + pr[at(a, b + 1)] + pr[at(a + 1, b)] - pr[at(a, b)];
      pb[at(a + 1, b + 1)] = bonus_of[j] + pb[at(a, b + 1)] + pb[at(a + 1, b)] - pb[at(a, b)];
    }
  IndexParts out{std::vector<double>(n), std::vector<double>(n)};
  for (std::size_t i = 0; i < n; ++i) {
    const auto [s, q] = grid.arm(i);
    if (st.T[i] <= 1) {
      const long s0 = std::max(0L, s - rs), s1 = std::min(grid.s_max, s + rs) + 1;
      const long q0 = std::max(0L, q - rq), q1 = std::min(grid.q_max, q + rq) + 1;
      const double cnt = static_cast<double>((s1 - s0) * (q1 - q0));
      out.mean[i] = (pr[at(s1, q1)] - pr[at(s0, q1)] - pr[at(s1, q0)] + pr[at(s0, q0)]) / cnt;
      out.bonus[i] = (pb[at(s1, q1)] - pb[at(s0, q1)] - pb[at(s1, q0)] + pb[at(s0, q0)]) / cnt;
      continue;
    }
    double sm = 0.0, sb = 0.0, cnt = 0.0;
    for (std::size_t j : explored) {
      const auto [s2, q2] = grid.arm(j);
      if (std::labs(s2 - s) > rs || std::labs(q2 - q) > rq || st.T[j] < st.T[i]) continue;
      sm += st.mean[j];
      sb += bonus_of[j];
      cnt += 1.0;
    }
    out.mean[i] = sm / cnt;
    out.bonus[i] = sb / cnt;
  }
  return out;
}

double certificate_log_chi_max(const SystemConfig& cfg, const ArmGrid& grid, double delta, double& log_chi2) {
  double l1 = -INFINITY;
  log_chi2 = -INFINITY;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto [s, q] = grid.arm(i);
    const ErgodicityCertificate c = make_certificate(cfg, s, q, delta);
    l1 = std::max(l1, c.chi.log_chi1);
    log_chi2 = std::max(log_chi2, c.chi.log_chi2);
  }
  return l1;
}

}  // namespace

LearnerRun run_ucb(const SystemConfig& cfg, const ArmGrid& grid, long N, const LearnerOptions& opts,
                   std::uint64_t seed) {
  cfg.validate();
  grid.validate();
  if (N < 0) throw std::invalid_argument("horizon must be nonnegative");
  const std::size_t n = grid.size();
  LearnerRun run;
  run.grid = grid;
  run.horizon = N;
  run.stats.phi.assign(n, 1);
  run.stats.T.assign(n, 1);
  run.stats.mean.assign(n, 0.0);

  double log_chi1 = -INFINITY, log_chi2 = -INFINITY;
  if (opts.mode == ConfidenceMode::certificate) log_chi1 = certificate_log_chi_max(cfg, grid, opts.delta, log_chi2);
  const double tuned = std::isnan(opts.tuned_scale) ? std::pow(10.0, -2.0 * static_cast<double>(cfg.tau))
                                                    : opts.tuned_scale;

  Rng demand(seed, stream_id(0, StreamKind::demand));
  Rng patience(seed, stream_id(0, StreamKind::patience));
  auto survivors = [&](long u) { return sample_survivors(cfg.p, u, patience); };

  // Period 0: start from s_max + q_max on hand, nothing on order.
  SystemState st = SystemState::start(cfg.tau, grid.s_max + grid.q_max);
  {
    const long D0 = cfg.demand.sample(demand);
    const long sales0 = std::min(st.I, D0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto [s, q] = grid.arm(i);
      run.stats.mean[i] = cfg.r * static_cast<double>(std::min(s + q, sales0)) -
                          cfg.h * static_cast<double>(std::max(0L, s + q - sales0));
    }
    const PeriodOutcome o = step(st, 0, D0, survivors, cfg.r, cfg.h);
    run.period0_reward = o.profit;
  }

  run.rewards.reserve(static_cast<std::size_t>(N));
  std::vector<std::size_t> explored;
  std::vector<char> is_explored(n, 0);
  long eta = 0;
  double log_H = -INFINITY;  // H_0 = 0
  for (long ell = 1; eta < N; ++ell) {
    const double delta_l = std::pow(2.0, -2.0 * static_cast<double>(ell));
    double log_h_used = log_H;
    if (opts.mode == ConfidenceMode::tuned) log_h_used = ell == 1 ? -INFINITY : std::log(tuned);
    const IndexParts parts = index_parts(grid, run.stats, eta, delta_l, explored);
    std::size_t best = 0;
    double best_val = -INFINITY;
    const bool lexicographic = log_h_used > 600.0;
    const double H = log_h_used == -INFINITY ? 0.0 : std::exp(std::min(log_h_used, 600.0));
    for (std::size_t i = 0; i < n; ++i) {
      bool better;
      if (lexicographic) {
        const double v = parts.bonus[i];
        better = v > parts.bonus[best] || (v == parts.bonus[best] && parts.mean[i] > parts.mean[best]);
        if (i == 0) better = true;
      } else {
        const double v = parts.mean[i] + H * parts.bonus[i];
        better = v > best_val;
        if (better) best_val = v;
      }
      if (better) best = i;
    }
    const auto [s, q] = grid.arm(best);
    run.stats.phi[best] += 1;
    const long length = 1L << std::min(run.stats.phi[best], 62L);
    const long eta_next = length > N - eta ? N : eta + length;

    const Policy policy = Policy::sq(s, q);
    long nu = 0;
    double credited = 0.0;
    for (long k = eta + 1; k <= eta_next; ++k) {
      const long Q = policy.order(st);
      if (nu == 0 && st.I + st.pipeline_sum() + Q <= s + q) nu = k;
      const long D = cfg.demand.sample(demand);
      const PeriodOutcome o = step(st, Q, D, survivors, cfg.r, cfg.h);
      run.rewards.push_back(o.profit);
      if (nu != 0) credited += o.profit;
    }
    if (nu != 0) {
      run.stats.T[best] = eta_next - nu + 1;
      run.stats.mean[best] = credited / static_cast<double>(run.stats.T[best]);
      if (!is_explored[best]) {
        is_explored[best] = 1;
        explored.push_back(best);
      }
    }
    EpochRecord rec;
    rec.epoch = ell;
    rec.s = s;
    rec.q = q;
    rec.length = length;
    rec.eta = eta_next;
    rec.nu = nu;
    rec.T_after = run.stats.T[best];
    rec.mean_after = run.stats.mean[best];
    rec.index = lexicographic ? INFINITY : best_val;
    rec.log_H = log_h_used;
    run.epochs.push_back(rec);
    eta = eta_next;
    if (opts.mode == ConfidenceMode::certificate)
      log_H = log_sum_exp(log_chi1, log_chi2 + opts.delta * std::log(static_cast<double>(eta)));
  }
  return run;
}

nlohmann::json RegretReport::to_json() const {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t i = 0; i < checkpoints.size(); ++i)
    rows.push_back({{"N", checkpoints[i]}, {"regret", regret[i]}, {"kappa", kappa[i]},
                    {"average_profit", average_profit[i]}});
  return {{"benchmark", benchmark}, {"checkpoints", rows}};
}

RegretReport regret(const LearnerRun& run, double benchmark, const std::vector<long>& checkpoints) {
  if (!(benchmark > 0.0)) throw std::domain_error("regret percentage needs a positive benchmark");
  RegretReport rep;
  rep.benchmark = benchmark;
  for (long c : checkpoints) {
    if (c < 1 || c > static_cast<long>(run.rewards.size())) throw std::invalid_argument("checkpoint outside the run");
    double total = 0.0;
    for (long k = 0; k < c; ++k) total += run.rewards[static_cast<std::size_t>(k)];
    const double rg = benchmark * static_cast<double>(c) - total;
    rep.checkpoints.push_back(c);
    rep.regret.push_back(rg);
    rep.kappa.push_back(rg / (benchmark * static_cast<double>(c)) * 100.0);
    rep.average_profit.push_back(total / static_cast<double>(c));
  }
  return rep;
}

void write_run_log_csv(std::ostream& os, const LearnerRun& run, double benchmark) {
  os << "epoch,s,q,length,nu,T_after,R_after,F_index,cumulative_regret\n";
  double cum = 0.0;
  long k = 0;
  for (const EpochRecord& e : run.epochs) {
    for (; k < e.eta; ++k) cum += benchmark - run.rewards[static_cast<std::size_t>(k)];
    os << e.epoch << ',' << e.s << ',' << e.q << ',' << e.length << ',' << e.nu << ',' << e.T_after << ','
       << e.mean_after << ',' << e.index << ',' << cum << '\n';
  }
}

}  // namespace pblab
