#include <Eigen/Core>
#include <fmt/format.h>

#include <fstream>
#include <sstream>

#include "pblab/cli.hpp"
#include "pblab/dp.hpp"
#include "pblab/ergodicity.hpp"
#include "pblab/experiments.hpp"
#include "pblab/kernels.hpp"
#include "pblab/parallel.hpp"
#include "pblab/sim.hpp"

#ifndef PBLAB_VERSION
#define PBLAB_VERSION "0.0.0"
#endif

namespace pblab::cli {

Fields::Fields(const nlohmann::json& j, std::string path) : j_(j), path_(std::move(path)) {
  if (!j_.is_object()) throw ConfigError((path_.empty() ? std::string("config") : path_) + ": must be an object");
}

void Fields::fail(const std::string& key, const std::string& what) const {
  throw ConfigError(field(key) + ": " + what);
}

const nlohmann::json& Fields::raw(const std::string& key) {
  if (!j_.contains(key)) fail(key, "missing");
  used_.insert(key);
  return j_.at(key);
}

const nlohmann::json* Fields::optional_raw(const std::string& key) {
  if (!j_.contains(key)) return nullptr;
  used_.insert(key);
  return &j_.at(key);
}

long Fields::integer(const std::string& key, std::optional<long> fallback, long min) {
  const auto* v = optional_raw(key);
  if (!v) {
    if (!fallback) fail(key, "missing");
    return *fallback;
  }
  if (!v->is_number_integer()) fail(key, "must be an integer");
  const long x = v->get<long>();
  if (x < min) fail(key, fmt::format("must be at least {}", min));
  return x;
}

double Fields::real(const std::string& key, std::optional<double> fallback) {
  const auto* v = optional_raw(key);
  if (!v) {
    if (!fallback) fail(key, "missing");
    return *fallback;
  }
  if (!v->is_number()) fail(key, "must be a number");
  return v->get<double>();
}

bool Fields::boolean(const std::string& key, bool fallback) {
  const auto* v = optional_raw(key);
  if (!v) return fallback;
  if (!v->is_boolean()) fail(key, "must be a boolean");
  return v->get<bool>();
}

std::string Fields::string(const std::string& key, std::optional<std::string> fallback) {
  const auto* v = optional_raw(key);
  if (!v) {
    if (!fallback) fail(key, "missing");
    return *fallback;
  }
  if (!v->is_string()) fail(key, "must be a string");
  return v->get<std::string>();
}

std::vector<long> Fields::integers(const std::string& key, std::optional<std::vector<long>> fallback) {
  const auto* v = optional_raw(key);
  if (!v) {
    if (!fallback) fail(key, "missing");
    return *fallback;
  }
  if (!v->is_array() || v->empty()) fail(key, "must be a nonempty array of integers");
  std::vector<long> out;
  for (const auto& e : *v) {
    if (!e.is_number_integer()) fail(key, "must be a nonempty array of integers");
    out.push_back(e.get<long>());
  }
  return out;
}

std::vector<double> Fields::reals(const std::string& key, std::optional<std::vector<double>> fallback) {
  const auto* v = optional_raw(key);
  if (!v) {
    if (!fallback) fail(key, "missing");
    return *fallback;
  }
  if (!v->is_array() || v->empty()) fail(key, "must be a nonempty array of numbers");
  std::vector<double> out;
  for (const auto& e : *v) {
    if (!e.is_number()) fail(key, "must be a nonempty array of numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

void Fields::finish() const {
  for (auto it = j_.begin(); it != j_.end(); ++it)
    if (!used_.count(it.key())) throw ConfigError(field(it.key()) + ": unknown key");
}

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names{"simulate", "dp",        "grid",      "gap",       "drift",
                                              "learn",    "table1to4", "table5to6", "table7to8", "diff"};
  return names;
}

namespace {

struct Context {
  std::string subcommand;
  std::uint64_t seed = 1;
  std::filesystem::path out;
  std::vector<std::string> outputs;
  std::ostream* log = nullptr;

  void write(const std::string& name, const std::string& content) {
    write_atomic(out / name, content);
    outputs.push_back(name);
  }
};

// Typed loaders translating library validation errors into config errors.
template <class Fn>
auto typed(const std::string& where, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    const std::string msg = e.what();
    throw ConfigError(msg.rfind(where, 0) == 0 ? msg : where + "." + msg);
  }
}

SystemConfig load_system(Fields& f) {
  return typed("system", [&] { return SystemConfig::from_json(f.raw("system")); });
}

EvalConfig load_eval(Fields& f, std::uint64_t seed) {
  const auto* j = f.optional_raw("eval");
  if (!j) {
    EvalConfig ec;
    ec.seed = seed;
    return ec;
  }
  return typed("eval", [&] { return EvalConfig::from_json(*j, seed); });
}

SearchOptions load_search(Fields& f) {
  SearchOptions so;
  const auto* j = f.optional_raw("search");
  if (!j) return so;
  Fields s(*j, "search");
  so.coarse_horizon = s.integer("coarse_horizon", so.coarse_horizon, 2);
  so.coarse_burn_in = s.integer("coarse_burn_in", so.coarse_burn_in, 0);
  so.coarse_replications = s.integer("coarse_replications", so.coarse_replications, 1);
  so.refine_top = static_cast<std::size_t>(s.integer("refine_top", static_cast<long>(so.refine_top), 1));
  s.finish();
  if (so.coarse_burn_in >= so.coarse_horizon) s.fail("coarse_burn_in", "must be below coarse_horizon");
  return so;
}

std::string num(double v) { return fmt::format("{:.4f}", v); }

// ---- simulate ----
void cmd_simulate(Fields& f, Context& ctx) {
  const SystemConfig cfg = load_system(f);
  const Policy policy = typed("policy", [&] { return Policy::from_json(f.raw("policy")); });
  const long horizon = f.integer("horizon");
  const long replication = f.integer("replication", 0);
  const bool check = f.boolean("check", true);
  const bool coupled = f.boolean("coupled", false);
  SystemState start = SystemState::start(cfg.tau, policy.level());
  if (const auto* j = f.optional_raw("initial_state"))
    start = typed("initial_state", [&] { return SystemState::from_json(*j, cfg.tau); });
  f.finish();

  std::ostringstream csv;
  nlohmann::json summary{{"horizon", horizon}};
  if (coupled) {
    if (policy.kind() != Policy::Kind::base_stock) f.fail("policy", "coupled runs need a base_stock policy");
    const CoupledTraces t = simulate_coupled(cfg, policy.s(), horizon, ctx.seed, static_cast<std::uint64_t>(replication));
    std::ostringstream b, l;
    write_trace_csv(csv, t.P);
    write_trace_csv(b, t.B);
    write_trace_csv(l, t.L);
    ctx.write("trace_B.csv", b.str());
    ctx.write("trace_L.csv", l.str());
    summary["cumulative_profit"] = {{"P", t.P.cumulative_profit}, {"B", t.B.cumulative_profit},
                                    {"L", t.L.cumulative_profit}};
  } else {
    const Trace t = simulate(cfg, policy, horizon, start, ctx.seed, static_cast<std::uint64_t>(replication));
    if (check) {
      if (auto k = flow_violation(t)) throw InvariantViolation(*k, "flow balance");
      if (auto k = conservation_violation(t)) throw InvariantViolation(*k, "inventory conservation");
      if (policy.kind() == Policy::Kind::base_stock && start == SystemState::start(cfg.tau, policy.s()))
        if (auto k = overshoot_bound_violation(t, policy.s())) throw InvariantViolation(*k, "overshoot bound");
    }
    write_trace_csv(csv, t);
    summary["cumulative_profit"] = t.cumulative_profit;
    summary["average_profit"] = horizon > 0 ? t.cumulative_profit / static_cast<double>(horizon) : 0.0;
    summary["final_state"] = {{"I", t.final_state.I}, {"B", t.final_state.B}, {"pipeline", t.final_state.pipeline}};
  }
  ctx.write("trace.csv", csv.str());
  ctx.write("summary.json", summary.dump(2) + "\n");
}

// ---- dp ----
void cmd_dp(Fields& f, Context& ctx) {
  const SystemConfig cfg = load_system(f);
  const double alpha = f.real("alpha");
  const double tol = f.real("tol", 1e-8);
  const long max_iters = f.integer("max_iters", 100000, 1);
  f.finish();
  if (cfg.tau != 0) throw ConfigError("system.tau: dp requires tau = 0");
  if (!(alpha >= 0.0 && alpha < 1.0)) throw ConfigError("alpha: must lie in [0,1)");
  if (!(tol > 0.0)) throw ConfigError("tol: must be positive");
  const DpProblem pr = DpProblem::make(cfg.demand, cfg.r, cfg.h, alpha, cfg.p);
  const ValueTable t = value_iterate(pr, tol, max_iters);
  const QuasiConcavity qc = verify_quasiconcave(t);
  std::ostringstream csv;
  csv << "x,value,post_decision\n";
  for (std::size_t i = 0; i < t.values.size(); ++i)
    csv << t.x_lo + static_cast<long>(i) << ',' << fmt::format("{}", t.values[i]) << ','
        << fmt::format("{}", t.post_decision[i]) << '\n';
  ctx.write("value_table.csv", csv.str());
  nlohmann::json s{{"maximizer", t.maximizer},  {"closed_form", closed_form_s_alpha(pr)},
                   {"quasiconcave", qc.ok},     {"iterations", t.iterations},
                   {"residual", t.residual},    {"x_lo", pr.x_lo},
                   {"x_hi", pr.x_hi}};
  ctx.write("summary.json", s.dump(2) + "\n");
}

// ---- grid ----
void cmd_grid(Fields& f, Context& ctx) {
  const SystemConfig cfg = load_system(f);
  const EvalConfig ec = load_eval(f, ctx.seed);
  const auto sr = f.integers("s_range");
  std::optional<std::vector<long>> qr;
  if (f.has("q_range")) qr = f.integers("q_range");
  f.finish();
  if (sr.size() != 2 || sr[0] < 0 || sr[1] < sr[0]) throw ConfigError("s_range: must be [lo, hi] with 0 <= lo <= hi");
  if (qr && (qr->size() != 2 || (*qr)[0] < 0 || (*qr)[1] < (*qr)[0]))
    throw ConfigError("q_range: must be [lo, hi] with 0 <= lo <= hi");
  if (!ec.crn) throw ConfigError("eval.crn: grid search requires common random numbers");
  const auto cands = qr ? sq_candidates(sr[0], sr[1], (*qr)[0], (*qr)[1]) : base_stock_candidates(sr[0], sr[1]);
  const GridResult g = grid_search_levels(cfg, cands, ec);
  std::ostringstream csv;
  csv << "s,q,mean,se,mean_backlog,mean_lost\n";
  for (const auto& c : g.candidates)
    csv << c.policy.s() << ',' << c.policy.q() << ',' << num(c.report.mean) << ',' << num(c.report.se) << ','
        << num(c.report.mean_backlog) << ',' << num(c.report.mean_lost) << '\n';
  ctx.write("grid.csv", csv.str());
  nlohmann::json s{{"best", g.best_policy().to_json()}, {"mean", g.best_report().mean}, {"se", g.best_report().se}};
  ctx.write("summary.json", s.dump(2) + "\n");
}

// ---- gap ----
void cmd_gap(Fields& f, Context& ctx) {
  const SystemConfig cfg = load_system(f);
  const EvalConfig ec = load_eval(f, ctx.seed);
  f.finish();
  GapReport g;
  try {
    const long s1 = b_system_level(cfg.demand, cfg.tau, cfg.r, cfg.h, b1_backorder_cost(cfg.r, cfg.h, cfg.tau));
    g = optimality_gap(cfg, cfg.p < 1.0 ? long_run_overshoot(cfg, s1, ec) : 0.0);
  } catch (const DegenerateEconomics& e) {
    throw ConfigError(std::string("system.p: ") + e.what());
  }
  std::ostringstream csv;
  csv << "tau,demand,r,h,p,level_lower,level_upper,b_lower,b_upper,overshoot,lower,upper,gap_upper\n";
  csv << cfg.tau << ',' << cfg.demand.label() << ',' << cfg.r << ',' << cfg.h << ',' << cfg.p << ','
      << g.level_lower << ',' << g.level_upper << ',' << num(g.b_lower) << ',' << num(g.b_upper) << ','
      << num(g.overshoot) << ',' << num(g.lower) << ',' << num(g.upper) << ',' << num(g.gap_percent) << '\n';
  ctx.write("gap.csv", csv.str());
}

// ---- drift ----
void cmd_drift(Fields& f, Context& ctx) {
  const SystemConfig cfg = load_system(f);
  const long s = f.integer("s");
  const long q = f.integer("q");
  const double delta = f.real("delta", 0.5);
  const long reps = f.integer("reps", 10000, 2);
  const std::string mode_s = f.string("mode", "one_step");
  const auto& starts_j = f.raw("starts");
  f.finish();
  if (!(delta > 0.0 && delta <= 1.0)) throw ConfigError("delta: must lie in (0,1]");
  DriftMode mode;
  if (mode_s == "one_step") mode = DriftMode::one_step;
  else if (mode_s == "multi_step") mode = DriftMode::multi_step;
  else throw ConfigError("mode: must be one_step or multi_step");
  if (!starts_j.is_array() || starts_j.empty()) throw ConfigError("starts: must be a nonempty array of states");
  std::vector<SystemState> starts;
  for (std::size_t i = 0; i < starts_j.size(); ++i)
    starts.push_back(typed(fmt::format("starts[{}]", i), [&] { return SystemState::from_json(starts_j[i], cfg.tau); }));
  if (cfg.p < 1.0) {
    try {
      ctx.write("certificate.json", make_certificate(cfg, s, q, delta).to_json().dump(2) + "\n");
    } catch (const std::domain_error& e) {
      *ctx.log << "certificate skipped: " << e.what() << '\n';
    }
  }
  std::vector<DriftReport> reports(starts.size());
  parallel_for(starts.size(), [&](std::size_t i) {
    reports[i] = empirical_drift_check(cfg, s, q, starts[i], mode, delta, reps, ctx.seed + i);
  });
  std::ostringstream csv;
  csv << "start,I,B,applicable,threshold,mean_drift,ci_upper,theoretical,pass\n";
  bool all = true;
  for (std::size_t i = 0; i < starts.size(); ++i) {
    const auto& r = reports[i];
    csv << i << ',' << starts[i].I << ',' << starts[i].B << ',' << r.applicable << ',' << num(r.threshold) << ','
        << fmt::format("{:.6f}", r.mean_drift) << ',' << fmt::format("{:.6f}", r.ci_upper) << ','
        << fmt::format("{:.6f}", r.theoretical) << ',' << (r.pass ? "PASS" : (r.applicable ? "FAIL" : "N/A")) << '\n';
    if (r.applicable && !r.pass) all = false;
  }
  ctx.write("drift.csv", csv.str());
  if (!all) throw InvariantViolation(0, "drift inequality not confirmed by the Monte Carlo upper bound");
}

ArmGrid load_grid(Fields& f, const SystemConfig& cfg) {
  ArmGrid g = ArmGrid::experiment_default(cfg);
  if (const auto* j = f.optional_raw("grid")) {
    Fields gf(*j, "grid");
    g.s_max = gf.integer("s_max", g.s_max);
    g.q_max = gf.integer("q_max", g.q_max);
    g.eps1 = gf.real("eps1", g.eps1);
    g.eps2 = gf.real("eps2", g.eps2);
    gf.finish();
    if (g.eps1 < 0) gf.fail("eps1", "must be nonnegative");
    if (g.eps2 < 0) gf.fail("eps2", "must be nonnegative");
  }
  return g;
}

LearnerOptions load_learner_options(Fields& f) {
  LearnerOptions lo;
  const std::string mode = f.string("mode", "tuned");
  if (mode == "tuned") lo.mode = ConfidenceMode::tuned;
  else if (mode == "certificate") lo.mode = ConfidenceMode::certificate;
  else f.fail("mode", "must be tuned or certificate");
  if (f.has("tuned_scale")) {
    lo.tuned_scale = f.real("tuned_scale");
    if (!(lo.tuned_scale >= 0.0)) f.fail("tuned_scale", "must be nonnegative");
  }
  lo.delta = f.real("delta", 0.5);
  if (!(lo.delta > 0.0 && lo.delta <= 1.0)) f.fail("delta", "must lie in (0,1]");
  return lo;
}

void check_learnable(const SystemConfig& cfg) {
  if (!(cfg.demand.alpha0() > 0.0) || !(cfg.demand.alpha1() > 0.0))
    throw ConfigError("system.demand: learner needs P[D=0] > 0 and P[D=1] > 0");
}

// ---- learn ----
void cmd_learn(Fields& f, Context& ctx) {
  const SystemConfig cfg = load_system(f);
  const long N = f.integer("N", std::nullopt, 1);
  const long seeds = f.integer("seeds", 1, 1);
  const LearnerOptions lo = load_learner_options(f);
  const ArmGrid grid = load_grid(f, cfg);
  const EvalConfig ec = load_eval(f, ctx.seed);
  const SearchOptions so = load_search(f);
  std::optional<double> bench;
  if (f.has("benchmark")) bench = f.real("benchmark");
  std::vector<long> cps = f.integers("checkpoints", std::vector<long>{20, 200, 500, 1000});
  f.finish();
  check_learnable(cfg);
  std::erase_if(cps, [N](long c) { return c < 1 || c > N; });
  if (cps.empty() || cps.back() != N) cps.push_back(N);
  SearchResult b;
  if (bench) {
    if (!(*bench > 0.0)) throw ConfigError("benchmark: must be positive");
    b.report.mean = *bench;
    b.best = Policy::sq(0, 0);
  } else {
    b = learner_benchmark(cfg, grid, ec, so);
  }
  const LearnerRow row = learner_row(cfg, grid, b, cps, seeds, lo, ctx.seed);
  const LearnerRun first = run_ucb(cfg, grid, N, lo, ctx.seed);
  std::ostringstream log;
  write_run_log_csv(log, first, row.benchmark);
  ctx.write("run_log.csv", log.str());
  nlohmann::json s = row.to_json();
  s["epochs_first_seed"] = first.epochs.size();
  ctx.write("summary.json", s.dump(2) + "\n");
}

struct CellSpec {
  std::vector<DemandModel> demands;
  std::vector<long> taus;
  std::vector<double> rs, ps;
  double h = 1.0;
};

CellSpec load_cells(Fields& f, std::vector<long> default_taus, std::vector<double> default_rs) {
  CellSpec c;
  const auto& dj = f.raw("demands");
  if (!dj.is_array() || dj.empty()) f.fail("demands", "must be a nonempty array of demand objects");
  for (std::size_t i = 0; i < dj.size(); ++i)
    c.demands.push_back(typed(fmt::format("demands[{}]", i), [&] { return DemandModel::from_json(dj[i]); }));
  c.taus = f.integers("taus", default_taus);
  c.rs = f.reals("rs", default_rs);
  c.ps = f.reals("ps");
  c.h = f.real("h", 1.0);
  for (long t : c.taus)
    if (t < 0) f.fail("taus", "entries must be nonnegative");
  for (double r : c.rs)
    if (!(r > 0.0)) f.fail("rs", "entries must be positive");
  for (double p : c.ps)
    if (!(p >= 0.0 && p <= 1.0)) f.fail("ps", "entries must lie in [0,1]");
  if (!(c.h > 0.0)) f.fail("h", "must be positive");
  return c;
}

std::vector<SystemConfig> expand(const CellSpec& c) {
  std::vector<SystemConfig> out;
  for (double p : c.ps)
    for (long tau : c.taus)
      for (const auto& d : c.demands)
        for (double r : c.rs) {
          SystemConfig cfg;
          cfg.demand = d;
          cfg.tau = tau;
          cfg.r = r;
          cfg.h = c.h;
          cfg.p = p;
          out.push_back(cfg);
        }
  return out;
}

std::string cell_prefix(const SystemConfig& cfg) {
  return fmt::format("{},{},{},{},{}", cfg.tau, cfg.demand.label(), cfg.r, cfg.h, cfg.p);
}

// ---- table1to4 ----
void cmd_table1to4(Fields& f, Context& ctx) {
  const CellSpec spec = load_cells(f, {2, 4, 6, 8, 10}, {4, 8, 16, 32, 64});
  const EvalConfig ec = load_eval(f, ctx.seed);
  const SearchOptions so = load_search(f);
  f.finish();
  for (double p : spec.ps)
    if (p >= 1.0) throw ConfigError("ps: the gap is undefined at p = 1");
  const auto cells = expand(spec);
  std::vector<BaseStockRow> rows(cells.size());
  parallel_for(cells.size(), [&](std::size_t i) {
    EvalConfig e = ec;
    e.seed = cell_seed(ctx.seed, cells[i]);
    rows[i] = base_stock_row(cells[i], e, std::nullopt, so);
  });
  std::ostringstream csv;
  csv << "tau,demand,r,h,p,s_star,sbar_star,C_s_star,C_sbar_star,gap_upper,rel_diff\n";
  for (const auto& r : rows)
    csv << cell_prefix(r.cfg) << ',' << r.s_star << ',' << r.sbar_star << ',' << num(r.at_s_star.mean) << ','
        << num(r.at_sbar_star.mean) << ',' << num(r.gap.gap_percent) << ',' << num(r.rel_diff) << '\n';
  ctx.write("table.csv", csv.str());
}

// ---- table5to6 ----
void cmd_table5to6(Fields& f, Context& ctx) {
  const CellSpec spec = load_cells(f, {0, 2, 4}, {4, 8, 16});
  const EvalConfig ec = load_eval(f, ctx.seed);
  const SearchOptions so = load_search(f);
  const long q_max = f.integer("q_max", 4);
  f.finish();
  const auto cells = expand(spec);
  std::vector<SqRow> rows(cells.size());
  parallel_for(cells.size(), [&](std::size_t i) {
    EvalConfig e = ec;
    e.seed = cell_seed(ctx.seed, cells[i]);
    rows[i] = sq_row(cells[i], e, q_max, so);
  });
  std::ostringstream csv;
  csv << "tau,demand,r,h,p,s_o,q_o,s_star,B_s_star,rel_diff\n";
  for (const auto& r : rows)
    csv << cell_prefix(r.cfg) << ',' << r.s_o << ',' << r.q_o << ',' << r.s_star << ',' << num(r.B_s_star) << ','
        << num(r.rel_diff) << '\n';
  ctx.write("table.csv", csv.str());
}

// ---- table7to8 ----
void cmd_table7to8(Fields& f, Context& ctx) {
  const CellSpec spec = load_cells(f, {2, 4, 6}, {4, 8, 16});
  const EvalConfig ec = load_eval(f, ctx.seed);
  const SearchOptions so = load_search(f);
  const LearnerOptions lo = load_learner_options(f);
  const long seeds = f.integer("seeds", 100, 1);
  std::vector<long> cps = f.integers("checkpoints", std::vector<long>{20, 200, 500, 1000});
  f.finish();
  for (long c : cps)
    if (c < 1) throw ConfigError("checkpoints: entries must be positive");
  std::sort(cps.begin(), cps.end());
  const auto cells = expand(spec);
  for (const auto& c : cells) check_learnable(c);
  std::vector<LearnerRow> rows(cells.size());
  parallel_for(cells.size(), [&](std::size_t i) {
    EvalConfig e = ec;
    e.seed = cell_seed(ctx.seed, cells[i]);
    const ArmGrid grid = ArmGrid::experiment_default(cells[i]);
    const SearchResult b = learner_benchmark(cells[i], grid, e, so);
    rows[i] = learner_row(cells[i], grid, b, cps, seeds, lo, e.seed);
  });
  std::ostringstream csv;
  csv << "tau,demand,r,h,p,benchmark,s_bench,q_bench";
  for (long c : cps) csv << ",profit_" << c;
  for (long c : cps) csv << ",kappa_" << c;
  csv << '\n';
  for (const auto& r : rows) {
    csv << cell_prefix(r.cfg) << ',' << num(r.benchmark) << ',' << r.benchmark_policy.s() << ','
        << r.benchmark_policy.q();
    for (double v : r.average_profit) csv << ',' << num(v);
    for (double v : r.kappa) csv << ',' << num(v);
    csv << '\n';
  }
  ctx.write("table.csv", csv.str());
}

// ---- diff ----
void cmd_diff(Fields& f, Context& ctx, const std::filesystem::path& base) {
  auto resolve = [&](const std::string& p) {
    const std::filesystem::path path(p);
    return path.is_absolute() ? path : base / path;
  };
  const std::string produced = f.string("produced");
  const std::string golden = f.string("golden");
  DiffOptions o;
  for (const auto& k : f.raw("keys")) {
    if (!k.is_string()) f.fail("keys", "must be an array of column names");
    o.keys.push_back(k.get<std::string>());
  }
  if (const auto* j = f.optional_raw("integer_columns"))
    for (const auto& k : *j) {
      if (!k.is_string()) f.fail("integer_columns", "must be an array of column names");
      o.integer_columns.insert(k.get<std::string>());
    }
  auto tol_map = [&](const char* key, std::map<std::string, double>& m) {
    if (const auto* j = f.optional_raw(key)) {
      if (!j->is_object()) f.fail(key, "must map column names to tolerances");
      for (auto it = j->begin(); it != j->end(); ++it) {
        if (!it->is_number() || it->get<double>() < 0) f.fail(key, "tolerances must be nonnegative numbers");
        m[it.key()] = it->get<double>();
      }
    }
  };
  tol_map("abs_tol", o.abs_tol);
  tol_map("rel_tol", o.rel_tol);
  o.default_abs_tol = f.real("default_abs_tol", 0.0);
  f.finish();
  CsvTable p, g;
  try {
    p = CsvTable::read(resolve(produced));
    g = CsvTable::read(resolve(golden));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  DiffReport rep;
  try {
    rep = diff_tables(p, g, o);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  ctx.write("diff.json", rep.to_json().dump(2) + "\n");
  std::ostringstream csv;
  csv << "row,column,produced,golden,abs_dev,rel_dev,status\n";
  for (const auto& c : rep.cells)
    csv << '"' << c.row_key << "\"," << c.column << ',' << c.produced << ',' << c.golden << ','
        << fmt::format("{:.6g}", c.abs_dev) << ',' << fmt::format("{:.6g}", c.rel_dev) << ','
        << (c.pass ? "ok" : (c.hard ? "HARD" : "FAIL")) << '\n';
  ctx.write("diff.csv", csv.str());
  *ctx.log << fmt::format("diff: {} cells, {} failures ({} hard)\n", rep.cells.size(), rep.failures,
                          rep.hard_failures);
  if (!rep.pass()) throw InvariantViolation(0, "table diff found out-of-tolerance cells");
}

std::string hex(std::uint64_t v) { return fmt::format("{:016x}", v); }

nlohmann::json manifest(const Context& ctx, const nlohmann::json& config) {
  return {{"subcommand", ctx.subcommand},
          {"config_hash", hex(fnv1a(config.dump()))},
          {"seed", ctx.seed},
          {"outputs", ctx.outputs},
          {"versions",
           {{"pblab", PBLAB_VERSION},
            {"compiler", __VERSION__},
            {"eigen", fmt::format("{}.{}.{}", EIGEN_WORLD_VERSION, EIGEN_MAJOR_VERSION, EIGEN_MINOR_VERSION)},
            {"fmt", FMT_VERSION},
            {"nlohmann_json", fmt::format("{}.{}.{}", NLOHMANN_JSON_VERSION_MAJOR, NLOHMANN_JSON_VERSION_MINOR,
                                          NLOHMANN_JSON_VERSION_PATCH)}}},
          {"kernel_backend", kernels::backend_name(kernels::active_backend())},
          {"config", config}};
}

}  // namespace

int run(const RunRequest& req, std::ostream& log, std::ostream& err) {
  const auto& names = subcommands();
  if (std::find(names.begin(), names.end(), req.subcommand) == names.end()) {
    err << "error: unknown subcommand '" << req.subcommand << "'\n";
    return exit_config;
  }
  nlohmann::json config;
  {
    std::ifstream in(req.config_path);
    if (!in) {
      err << "error: cannot read config " << req.config_path << '\n';
      return exit_config;
    }
    try {
      config = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
      err << "error: config is not valid JSON: " << e.what() << '\n';
      return exit_config;
    }
  }
  Context ctx;
  ctx.subcommand = req.subcommand;
  ctx.log = &log;
  try {
    Fields f(config, "");
    const std::string kind = f.string("experiment", req.subcommand);
    if (kind != req.subcommand)
      f.fail("experiment", "'" + kind + "' does not match subcommand '" + req.subcommand + "'");
    const long seed = f.integer("seed", 1, 0);
    ctx.seed = req.seed ? *req.seed : static_cast<std::uint64_t>(seed);
    const std::string out = f.string("out", "out/" + req.subcommand);
    ctx.out = req.out ? *req.out : std::filesystem::path(out);
    if (req.subcommand == "simulate") cmd_simulate(f, ctx);
    else if (req.subcommand == "dp") cmd_dp(f, ctx);
    else if (req.subcommand == "grid") cmd_grid(f, ctx);
    else if (req.subcommand == "gap") cmd_gap(f, ctx);
    else if (req.subcommand == "drift") cmd_drift(f, ctx);
    else if (req.subcommand == "learn") cmd_learn(f, ctx);
    else if (req.subcommand == "table1to4") cmd_table1to4(f, ctx);
    else if (req.subcommand == "table5to6") cmd_table5to6(f, ctx);
    else if (req.subcommand == "table7to8") cmd_table7to8(f, ctx);
    else cmd_diff(f, ctx, req.config_path.parent_path());
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return exit_config;
  } catch (const InvariantViolation& e) {
    err << "check failed: " << e.what() << '\n';
    if (!ctx.out.empty()) {
      try {
        write_atomic(ctx.out / "manifest.json", manifest(ctx, config).dump(2) + "\n");
      } catch (...) {
      }
    }
    return exit_check;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_config;
  }
  write_atomic(ctx.out / "manifest.json", manifest(ctx, config).dump(2) + "\n");
  log << "wrote " << ctx.outputs.size() << " file(s) to " << ctx.out.string() << '\n';
  return exit_ok;
}

}  // namespace pblab::cli
