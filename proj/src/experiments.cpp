#include "pblab/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "pblab/exact_chain.hpp"
#include "pblab/parallel.hpp"
#include "pblab/policies.hpp"

namespace pblab {

SearchResult search_policies(const SystemConfig& cfg, const std::vector<Policy>& candidates, const EvalConfig& ec,
                             const SearchOptions& opts) {
  if (candidates.empty()) throw std::invalid_argument("candidate set is empty");
  EvalConfig coarse = ec;
  coarse.crn = true;
  coarse.horizon = std::min(ec.horizon, opts.coarse_horizon);
  coarse.burn_in = std::min(ec.burn_in, opts.coarse_burn_in);
  coarse.replications = std::min(ec.replications, opts.coarse_replications);
  std::vector<double> score(candidates.size());
  for (std::size_t k = 0; k < candidates.size(); ++k) score[k] = long_run_average(cfg, candidates[k], coarse).mean;
  std::vector<std::size_t> order(candidates.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return score[a] > score[b]; });
  order.resize(std::min(order.size(), std::max<std::size_t>(1, opts.refine_top)));
  std::sort(order.begin(), order.end());
  std::vector<Policy> finalists;
  for (std::size_t k : order) finalists.push_back(candidates[k]);
  EvalConfig full = ec;
  full.crn = true;
  const GridResult g = grid_search_levels(cfg, finalists, full);
  SearchResult res;
  res.best = g.best_policy();
  res.report = g.best_report();
  res.evaluated = candidates.size();
  return res;
}

std::pair<long, long> base_stock_window(const SystemConfig& cfg, long margin) {
  const DemandModel w = lead_time_demand(cfg.demand, cfg.tau + 1);
  const double b_hi = b1_backorder_cost(cfg.r, cfg.h, cfg.tau);
  const double b_lo = std::max(b2_backorder_cost(cfg.r, cfg.p, cfg.tau), 1e-3);
  const long lo = b_system_level(w, cfg.h, b_lo);
  const long hi = b_system_level(w, cfg.h, b_hi);
  return {std::max(0L, std::min(lo, hi) - margin), std::max(lo, hi) + margin};
}

nlohmann::json BaseStockRow::to_json() const {
  return {{"tau", cfg.tau},
          {"demand", cfg.demand.label()},
          {"r", cfg.r},
          {"h", cfg.h},
          {"p", cfg.p},
          {"s_star", s_star},
          {"sbar_star", sbar_star},
          {"C_s_star", at_s_star.mean},
          {"C_s_star_se", at_s_star.se},
          {"C_sbar_star", at_sbar_star.mean},
          {"C_sbar_star_se", at_sbar_star.se},
          {"gap_upper", gap.gap_percent},
          {"overshoot", gap.overshoot},
          {"rel_diff", rel_diff}};
}

BaseStockRow base_stock_row(const SystemConfig& cfg, const EvalConfig& ec, std::optional<long> s_star,
                            const SearchOptions& opts) {
  BaseStockRow row;
  row.cfg = cfg;
  row.sbar_star = b_system_level(cfg.demand, cfg.tau, cfg.r, cfg.h, b1_backorder_cost(cfg.r, cfg.h, cfg.tau));
  if (s_star) {
    row.s_star = *s_star;
    row.at_s_star = long_run_average(cfg, Policy::base_stock(row.s_star), ec);
  } else {
    const auto [lo, hi] = base_stock_window(cfg);
    const SearchResult sr = search_policies(cfg, base_stock_candidates(lo, hi), ec, opts);
    row.s_star = sr.best.s();
    row.at_s_star = sr.report;
  }
  row.at_sbar_star = long_run_average(cfg, Policy::base_stock(row.sbar_star), ec);
  row.gap = optimality_gap(cfg, long_run_overshoot(cfg, row.sbar_star, ec));
  row.rel_diff = (1.0 - row.at_sbar_star.mean / row.at_s_star.mean) * 100.0;
  return row;
}

nlohmann::json SqRow::to_json() const {
  return {{"tau", cfg.tau}, {"demand", cfg.demand.label()}, {"r", cfg.r},         {"h", cfg.h},
          {"p", cfg.p},     {"s_o", s_o},                   {"q_o", q_o},         {"s_star", s_star},
          {"B_s_star", B_s_star}, {"C_sq", C_sq},           {"C_s", C_s},         {"rel_diff", rel_diff},
          {"exact", exact}};
}

namespace {

long default_b_max(const SystemConfig& cfg) { return 5 * cfg.demand.cap() + 40; }

}  // namespace

double exact_long_run_average(const SystemConfig& cfg, const Policy& policy, long b_max) {
  const ExactChain ch = build_exact_chain(cfg, policy, b_max < 0 ? default_b_max(cfg) : b_max);
  return stationary_reward(ch, stationary_distribution(ch));
}

double exact_mean_backlog(const SystemConfig& cfg, const Policy& policy, long b_max) {
  const ExactChain ch = build_exact_chain(cfg, policy, b_max < 0 ? default_b_max(cfg) : b_max);
  const auto pi = stationary_distribution(ch);
  double m = 0.0;
  for (std::size_t x = 0; x < ch.size(); ++x) m += pi[x] * static_cast<double>(ch.states[x].second);
  return m;
}

SqRow sq_row(const SystemConfig& cfg, const EvalConfig& ec, long q_max, const SearchOptions& opts) {
  SqRow row;
  row.cfg = cfg;
  const auto [lo, hi] = base_stock_window(cfg);
  if (cfg.tau == 0) {
    row.exact = true;
    double best = -INFINITY;
    for (long s = lo; s <= hi; ++s) {
      const double v = exact_long_run_average(cfg, Policy::base_stock(s));
      if (v > best) {
        best = v;
        row.s_star = s;
      }
    }
    row.C_s = best;
    row.B_s_star = exact_mean_backlog(cfg, Policy::base_stock(row.s_star));
    best = -INFINITY;
    for (long s = lo; s <= hi; ++s)
      for (long q = 0; q <= q_max; ++q) {
        const double v = exact_long_run_average(cfg, Policy::sq(s, q));
        if (v > best) {
          best = v;
          row.s_o = s;
          row.q_o = q;
        }
      }
    row.C_sq = best;
  } else {
    const SearchResult bs = search_policies(cfg, base_stock_candidates(lo, hi), ec, opts);
    row.s_star = bs.best.s();
    row.C_s = bs.report.mean;
    row.B_s_star = bs.report.mean_backlog;
    const SearchResult sq = search_policies(cfg, sq_candidates(lo, hi, 0, q_max), ec, opts);
    row.s_o = sq.best.s();
    row.q_o = sq.best.q();
    row.C_sq = sq.report.mean;
  }
  row.rel_diff = (1.0 - row.C_sq / row.C_s) * 100.0;
  return row;
}

nlohmann::json LearnerRow::to_json() const {
  nlohmann::json cps = nlohmann::json::array();
  for (std::size_t i = 0; i < checkpoints.size(); ++i)
    cps.push_back({{"N", checkpoints[i]}, {"average_profit", average_profit[i]}, {"kappa", kappa[i]},
                   {"kappa_se", kappa_se[i]}});
  return {{"tau", cfg.tau},
          {"demand", cfg.demand.label()},
          {"r", cfg.r},
          {"h", cfg.h},
          {"p", cfg.p},
          {"s_max", grid.s_max},
          {"q_max", grid.q_max},
          {"benchmark", benchmark},
          {"benchmark_s", benchmark_policy.s()},
          {"benchmark_q", benchmark_policy.q()},
          {"seeds", seeds},
          {"checkpoints", cps}};
}

SearchResult learner_benchmark(const SystemConfig& cfg, const ArmGrid& grid, const EvalConfig& ec,
                               const SearchOptions& opts) {
  return search_policies(cfg, sq_candidates(0, grid.s_max, 0, grid.q_max), ec, opts);
}

LearnerRow learner_row(const SystemConfig& cfg, const ArmGrid& grid, const SearchResult& benchmark,
                       const std::vector<long>& checkpoints, long seeds, const LearnerOptions& lo,
                       std::uint64_t base_seed) {
  if (seeds < 1) throw std::invalid_argument("need at least one seed");
  LearnerRow row;
  row.cfg = cfg;
  row.grid = grid;
  row.benchmark_policy = benchmark.best;
  row.benchmark = benchmark.report.mean;
  row.checkpoints = checkpoints;
  row.seeds = seeds;
  const long N = *std::max_element(checkpoints.begin(), checkpoints.end());
  std::vector<RegretReport> reps(static_cast<std::size_t>(seeds));
  parallel_for(reps.size(), [&](std::size_t k) {
    const LearnerRun run = run_ucb(cfg, grid, N, lo, base_seed + k);
    reps[k] = regret(run, row.benchmark, checkpoints);
  });
  const double n = static_cast<double>(seeds);
  for (std::size_t c = 0; c < checkpoints.size(); ++c) {
    double kp = 0.0, kk = 0.0, ap = 0.0;
    for (const auto& r : reps) {
      kp += r.kappa[c];
      kk += r.kappa[c] * r.kappa[c];
      ap += r.average_profit[c];
    }
    const double mean = kp / n;
    row.kappa.push_back(mean);
    row.average_profit.push_back(ap / n);
    row.kappa_se.push_back(seeds > 1 ? std::sqrt(std::max(0.0, (kk - n * mean * mean) / (n - 1.0)) / n) : 0.0);
  }
  return row;
}

std::uint64_t cell_seed(std::uint64_t base, const SystemConfig& cfg) {
  return base ^ fnv1a(cfg.to_json().dump());
}

}  // namespace pblab
