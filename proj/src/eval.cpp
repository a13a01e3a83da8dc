#include "pblab/eval.hpp"

#include <cmath>

#include "pblab/parallel.hpp"
#include "pblab/sim.hpp"

namespace pblab {

void EvalConfig::validate() const {
  if (horizon < 1) throw std::invalid_argument("eval.horizon: must be a positive integer");
  if (burn_in < 0 || burn_in >= horizon) throw std::invalid_argument("eval.burn_in: must lie in [0, horizon)");
  if (replications < 1) throw std::invalid_argument("eval.replications: must be a positive integer");
}

EvalConfig EvalConfig::from_json(const nlohmann::json& j, std::uint64_t seed) {
  EvalConfig ec;
  ec.seed = seed;
  if (!j.is_object()) throw std::invalid_argument("eval: must be an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    const auto& k = it.key();
    if (k == "horizon" || k == "burn_in" || k == "replications") {
      if (!it->is_number_integer()) throw std::invalid_argument("eval." + k + ": must be an integer");
      const long v = it->get<long>();
      (k == "horizon" ? ec.horizon : k == "burn_in" ? ec.burn_in : ec.replications) = v;
    } else if (k == "crn") {
      if (!it->is_boolean()) throw std::invalid_argument("eval.crn: must be a boolean");
      ec.crn = it->get<bool>();
    } else {
      throw std::invalid_argument("eval." + k + ": unknown key");
    }
  }
  ec.validate();
  return ec;
}

nlohmann::json EvalConfig::to_json() const {
  return {{"horizon", horizon}, {"burn_in", burn_in}, {"replications", replications}, {"crn", crn}};
}

SystemState eval_start_state(const SystemConfig& cfg, const Policy& policy) {
  return SystemState::start(cfg.tau, policy.level());
}

EvalReport long_run_average(const SystemConfig& cfg, const Policy& policy, const EvalConfig& ec) {
  cfg.validate();
  ec.validate();
  const std::size_t reps = static_cast<std::size_t>(ec.replications);
  const std::uint64_t seed = ec.crn ? ec.seed : ec.seed ^ fnv1a(policy.name());
  std::vector<double> profit(reps), backlog(reps), lost(reps), over(reps);
  const double window = static_cast<double>(ec.horizon - ec.burn_in);
  parallel_for(reps, [&](std::size_t rep) {
    Rng demand(seed, stream_id(rep, StreamKind::demand));
    Rng patience(seed, stream_id(rep, StreamKind::patience));
    SystemState st = eval_start_state(cfg, policy);
    double sp = 0.0;
    long sb = 0, sl = 0, so = 0;
    run_periods(cfg, policy, ec.horizon, st, demand, patience, [&](const PeriodOutcome& o) {
      if (o.period <= ec.burn_in) return;
      sp += o.profit;
      sb += o.B;
      sl += o.L;
      so += o.O;
    });
    profit[rep] = sp / window;
    backlog[rep] = static_cast<double>(sb) / window;
    lost[rep] = static_cast<double>(sl) / window;
    over[rep] = static_cast<double>(so) / window;
  });
  EvalReport rep;
  rep.per_replication = profit;
  const double n = static_cast<double>(reps);
  for (std::size_t k = 0; k < reps; ++k) {
    rep.mean += profit[k] / n;
    rep.mean_backlog += backlog[k] / n;
    rep.mean_lost += lost[k] / n;
    rep.mean_overshoot += over[k] / n;
  }
  if (reps > 1) {
    double ss = 0.0;
    for (double v : profit) ss += (v - rep.mean) * (v - rep.mean);
    rep.se = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  }
  return rep;
}

double b_system_penalty(const DemandModel& lead_time, double h, double b, long s) {
  if (s < 0) throw std::invalid_argument("level must be nonnegative");
  const double below = lead_time.expected_shortfall_below(s);
  const double above = lead_time.mean() - static_cast<double>(s) + below;
  return h * below + b * above;
}

double b_system_closed_form(const DemandModel& demand, long tau, double r, double h, double b, long s) {
  return r * demand.mean() - b_system_penalty(lead_time_demand(demand, tau + 1), h, b, s);
}

GapReport optimality_gap(const SystemConfig& cfg, double overshoot_estimate) {
  cfg.validate();
  GapReport g;
  g.b_lower = b1_backorder_cost(cfg.r, cfg.h, cfg.tau);
  g.b_upper = b2_backorder_cost(cfg.r, cfg.p, cfg.tau);
  if (!(g.b_upper > 0.0))
    throw DegenerateEconomics("upper bounding system has zero backorder cost (p = 1); gap undefined");
  const DemandModel w = lead_time_demand(cfg.demand, cfg.tau + 1);
  const double sales = cfg.r * cfg.demand.mean();
  g.level_lower = b_system_level(w, cfg.h, g.b_lower);
  g.level_upper = b_system_level(w, cfg.h, g.b_upper);
  g.overshoot = overshoot_estimate;
  g.lower = sales - b_system_penalty(w, cfg.h, g.b_lower, g.level_lower) - cfg.h * overshoot_estimate;
  g.upper = sales - b_system_penalty(w, cfg.h, g.b_upper, g.level_upper);
  if (!(g.upper > 0.0)) throw DegenerateEconomics("upper bound is not positive; gap undefined");
  g.gap_percent = (1.0 - g.lower / g.upper) * 100.0;
  return g;
}

double long_run_overshoot(const SystemConfig& cfg, long s, const EvalConfig& ec) {
  if (cfg.tau == 0 || cfg.p == 0.0 || cfg.p == 1.0) return 0.0;
  return long_run_average(cfg, Policy::base_stock(s), ec).mean_overshoot;
}

GridResult grid_search_levels(const SystemConfig& cfg, const std::vector<Policy>& candidates,
                              const EvalConfig& ec) {
  if (candidates.empty()) throw std::invalid_argument("candidate set is empty");
  if (!ec.crn) throw std::invalid_argument("grid search requires common random numbers");
  GridResult res;
  for (const auto& pol : candidates) res.candidates.push_back({pol, long_run_average(cfg, pol, ec)});
  auto key_less = [](const Policy& a, const Policy& b) {
    return a.s() != b.s() ? a.s() < b.s() : a.q() < b.q();
  };
  for (std::size_t k = 1; k < res.candidates.size(); ++k) {
    const auto& cur = res.candidates[k];
    const auto& best = res.candidates[res.best];
    if (cur.report.mean > best.report.mean ||
        (cur.report.mean == best.report.mean && key_less(cur.policy, best.policy)))
      res.best = k;
  }
  return res;
}

std::vector<Policy> base_stock_candidates(long s_lo, long s_hi) {
  std::vector<Policy> out;
  for (long s = s_lo; s <= s_hi; ++s) out.push_back(Policy::base_stock(s));
  return out;
}

std::vector<Policy> sq_candidates(long s_lo, long s_hi, long q_lo, long q_hi) {
  std::vector<Policy> out;
  for (long s = s_lo; s <= s_hi; ++s)
    for (long q = q_lo; q <= q_hi; ++q) out.push_back(Policy::sq(s, q));
  return out;
}

}  // namespace pblab
