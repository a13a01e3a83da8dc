#include "pblab/sim.hpp"

#include <fmt/format.h>

#include <cmath>
#include <numeric>

namespace pblab {

void SystemConfig::validate() const {
  if (tau < 0) throw std::invalid_argument("system.tau: must be a nonnegative integer");
  if (!(r > 0.0) || !std::isfinite(r)) throw std::invalid_argument("system.r: must be positive");
  if (!(h > 0.0) || !std::isfinite(h)) throw std::invalid_argument("system.h: must be positive");
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("system.p: must lie in [0,1]");
  if (!(b >= 0.0) || !std::isfinite(b)) throw std::invalid_argument("system.b: must be nonnegative");
}

SystemConfig SystemConfig::from_json(const nlohmann::json& j) {
  auto fail = [](const std::string& what) { throw std::invalid_argument("system." + what); };
  if (!j.is_object()) fail("(root): must be an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    const auto& k = it.key();
    if (k != "demand" && k != "tau" && k != "r" && k != "h" && k != "p" && k != "b") fail(k + ": unknown key");
  }
  SystemConfig cfg;
  if (!j.contains("demand")) fail("demand: missing");
  try {
    cfg.demand = DemandModel::from_json(j["demand"]);
  } catch (const std::invalid_argument& e) {
    fail(e.what());
  }
  auto real = [&](const char* key, double fallback, bool required) {
    if (!j.contains(key)) {
      if (required) fail(std::string(key) + ": missing");
      return fallback;
    }
    if (!j[key].is_number()) fail(std::string(key) + ": must be a number");
    return j[key].get<double>();
  };
  if (j.contains("tau")) {
    if (!j["tau"].is_number_integer()) fail("tau: must be a nonnegative integer");
    cfg.tau = j["tau"].get<long>();
  }
  cfg.r = real("r", 0.0, true);
  cfg.h = real("h", 1.0, false);
  cfg.p = real("p", 0.0, true);
  cfg.b = real("b", 0.0, false);
  cfg.validate();
  return cfg;
}

nlohmann::json SystemConfig::to_json() const {
  return {{"demand", demand.to_json()}, {"tau", tau}, {"r", r}, {"h", h}, {"p", p}, {"b", b}};
}

SystemConfig SystemConfig::with_patience(double stay) const {
  SystemConfig c = *this;
  c.p = stay;
  return c;
}

long SystemState::pipeline_sum() const { return std::accumulate(pipeline.begin(), pipeline.end(), 0L); }

void SystemState::validate(long tau) const {
  if (I < 0 || B < 0) throw std::invalid_argument("state: on-hand and backlog must be nonnegative");
  if (I > 0 && B > 0) throw std::invalid_argument("state: on-hand and backlog cannot both be positive");
  if (static_cast<long>(pipeline.size()) != tau)
    throw std::invalid_argument("state.pipeline: length must equal the lead time");
  for (long q : pipeline)
    if (q < 0) throw std::invalid_argument("state.pipeline: entries must be nonnegative");
}

SystemState SystemState::start(long tau, long on_hand) {
  SystemState st;
  st.I = on_hand;
  st.pipeline.assign(static_cast<std::size_t>(tau), 0);
  return st;
}

SystemState SystemState::from_json(const nlohmann::json& j, long tau) {
  if (!j.is_object()) throw std::invalid_argument("initial_state: must be an object");
  SystemState st = start(tau, 0);
  for (auto it = j.begin(); it != j.end(); ++it) {
    const auto& k = it.key();
    if (k == "I" || k == "B") {
      if (!it->is_number_integer()) throw std::invalid_argument("initial_state." + k + ": must be an integer");
      (k == "I" ? st.I : st.B) = it->get<long>();
    } else if (k == "pipeline") {
      if (!it->is_array()) throw std::invalid_argument("initial_state.pipeline: must be an array");
      st.pipeline.clear();
      for (const auto& v : *it) {
        if (!v.is_number_integer()) throw std::invalid_argument("initial_state.pipeline: entries must be integers");
        st.pipeline.push_back(v.get<long>());
      }
    } else {
      throw std::invalid_argument("initial_state." + k + ": unknown key");
    }
  }
  try {
    st.validate(tau);
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(std::string("initial_") + e.what());
  }
  return st;
}

PeriodOutcome step(SystemState& st, long Q, long D, double p, Rng& patience, double r, double h) {
  return step(st, Q, D, [&](long u) { return sample_survivors(p, u, patience); }, r, h);
}

Trace simulate(const SystemConfig& cfg, const Policy& policy, long horizon, const SystemState& initial,
               Rng& demand_rng, Rng& patience_rng) {
  if (horizon < 0) throw std::invalid_argument("horizon must be nonnegative");
  initial.validate(cfg.tau);
  Trace trace;
  trace.tau = cfg.tau;
  trace.level = policy.level();
  trace.periods.reserve(static_cast<std::size_t>(horizon));
  SystemState st = initial;
  run_periods(cfg, policy, horizon, st, demand_rng, patience_rng, [&](const PeriodOutcome& out) {
    trace.periods.push_back(out);
    trace.cumulative_profit += out.profit;
  });
  trace.final_state = st;
  return trace;
}

Trace simulate(const SystemConfig& cfg, const Policy& policy, long horizon, const SystemState& initial,
               std::uint64_t seed, std::uint64_t replication) {
  Rng demand(seed, stream_id(replication, StreamKind::demand));
  Rng patience(seed, stream_id(replication, StreamKind::patience));
  return simulate(cfg, policy, horizon, initial, demand, patience);
}

long overshoot(const SystemState& state, long s) { return std::max(0L, state.inventory_position() - s); }

CoupledTraces simulate_coupled(const SystemConfig& cfg, long s, long horizon, std::uint64_t seed,
                               std::uint64_t replication) {
  const Policy policy = Policy::base_stock(s);
  const SystemState start = SystemState::start(cfg.tau, s);
  CoupledTraces out;
  {
    Rng demand(seed, stream_id(replication, StreamKind::demand));
    Rng patience(seed, stream_id(replication, StreamKind::patience));
    out.P = simulate(cfg, policy, horizon, start, demand, patience);
  }
  // The two degenerate systems need no patience draws; their streams are unused.
  {
    Rng demand(seed, stream_id(replication, StreamKind::demand));
    Rng unused(seed, stream_id(replication, StreamKind::patience));
    out.B = simulate(cfg.with_patience(1.0), policy, horizon, start, demand, unused);
  }
  {
    Rng demand(seed, stream_id(replication, StreamKind::demand));
    Rng unused(seed, stream_id(replication, StreamKind::patience));
    out.L = simulate(cfg.with_patience(0.0), policy, horizon, start, demand, unused);
  }
  const long tau = cfg.tau;
  std::vector<long> lost_prefix(static_cast<std::size_t>(horizon) + 1, 0);
  for (long i = 1; i <= horizon; ++i) lost_prefix[i] = lost_prefix[i - 1] + out.P.at(i).L;
  for (long i = 1; i <= horizon; ++i) {
    const auto& pp = out.P.at(i);
    const auto& bb = out.B.at(i);
    if (pp.D != bb.D) throw InvariantViolation(i, "coupled demand paths diverged");
    if (bb.N > pp.N) throw InvariantViolation(i, "full-backlog net inventory exceeds partial-backlog net inventory");
    const long from = std::max(i - tau, 1L);
    const long lost = from <= i - 1 ? lost_prefix[i - 1] - lost_prefix[from - 1] : 0;
    const long back = i - tau;
    const long over = back >= 1 ? out.P.at(back).O : 0;
    if (pp.N > bb.N + lost + over)
      throw InvariantViolation(i, "net inventory exceeds the lost-sales plus overshoot envelope");
    if (pp.B + pp.L > bb.B) throw InvariantViolation(i, "backlog plus lost exceeds full-backlog backlog");
  }
  return out;
}

std::optional<long> overshoot_bound_violation(const Trace& trace, long s) {
  const long n = static_cast<long>(trace.size());
  const long tau = trace.tau;
  std::vector<long> demand_prefix(static_cast<std::size_t>(n) + 1, 0);
  for (long i = 1; i <= n; ++i) demand_prefix[i] = demand_prefix[i - 1] + trace.at(i).D;
  auto demand_sum = [&](long a, long b) { return a > b ? 0L : demand_prefix[b] - demand_prefix[a - 1]; };
  long last = 1;
  for (long i = 1; i <= n; ++i) {
    const auto& cur = trace.at(i);
    if (cur.IP <= s) last = i;
    const long carried = trace.at(last).B_prev;
    long bound = carried;
    if (last < i - tau) bound = std::min(bound, std::max(0L, carried - demand_sum(last + tau, i - 1)));
    if (std::max(0L, cur.IP - s) > bound) return i;
  }
  return std::nullopt;
}

bool overshoot_bound_check(const Trace& trace, long s) { return !overshoot_bound_violation(trace, s); }

std::optional<long> conservation_violation(const Trace& trace) {
  for (std::size_t k = 0; k + 1 < trace.periods.size(); ++k) {
    const auto& a = trace.periods[k];
    const auto& b = trace.periods[k + 1];
    if (b.N != a.N + b.arrived - a.D + a.L) return b.period;
  }
  return std::nullopt;
}

std::optional<long> flow_violation(const Trace& trace) {
  for (const auto& o : trace.periods) {
    if (o.sales + o.U != o.B_prev + o.D) return o.period;
    if (o.B > o.U || o.B + o.L != o.U) return o.period;
    if (o.I > 0 && o.B_prev > 0) return o.period;
    if (o.sales < 0 || o.L < 0 || o.B < 0) return o.period;
  }
  return std::nullopt;
}

std::optional<long> sq_block_violation(const Trace& base, const Trace& sq, long s, long q, double r,
                                       double h) {
  const long n = static_cast<long>(std::min(base.size(), sq.size()));
  auto klass = [&](long i) {
    const long on_hand = sq.at(i).I;
    if (on_hand == 0) return 0;
    return on_hand <= s ? 1 : 2;
  };
  const double eps = 1e-9;
  long i0 = 1;
  while (i0 <= n) {
    const int c = klass(i0);
    long i1 = i0;
    while (i1 + 1 <= n && klass(i1 + 1) == c) ++i1;
    if (i0 >= 2) {
      const long k = i1 - i0;
      double diff = 0.0;
      for (long i = i0; i <= i1; ++i) diff += base.at(i).profit - sq.at(i).profit;
      double bound = 0.0;
      if (c == 1) {
        for (long i = i0 + 1; i <= i1; ++i)
          if (base.at(i).sales != sq.at(i).sales) return i;
        for (long i = i0 + 1; i <= std::min(i1 + 1, n); ++i)
          if (base.at(i).I != sq.at(i).I) return i;
        bound = r * static_cast<double>(base.at(i0).B_prev);
      } else if (c == 0) {
        long backlog = 0;
        for (long i = i0 - 1; i <= i1 - 1; ++i) backlog += base.at(i + 1).B_prev;
        long held = 0;
        for (long i = i0 + 1; i <= i1; ++i) held += base.at(i).I;
        bound = r * static_cast<double>(backlog) - (h + r) * static_cast<double>(held) -
                static_cast<double>(k) * r * static_cast<double>(q) + h * static_cast<double>(q);
      } else {
        if (sq.at(i0).I > s + q) return i0;
        bound = static_cast<double>(k + 1) * (static_cast<double>(q) * h + r * static_cast<double>(std::max(0L, q - s)));
      }
      if (diff > bound + eps * (1.0 + std::fabs(bound))) return i0;
    }
    i0 = i1 + 1;
  }
  return std::nullopt;
}

void write_trace_csv(std::ostream& os, const Trace& trace) {
  os << "period,D,Q,sales,L,B,I,N,IP,O,profit\n";
  for (const auto& o : trace.periods)
    os << fmt::format("{},{},{},{},{},{},{},{},{},{},{}\n", o.period, o.D, o.Q, o.sales, o.L, o.B, o.I, o.N,
                      o.IP, o.O, o.profit);
}

}  // namespace pblab
