#pragma once

#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "pblab/policies.hpp"
#include "pblab/rng.hpp"
#include "pblab/state.hpp"

namespace pblab {

// A pathwise relation that must hold on every sample path failed.
class InvariantViolation : public std::runtime_error {
 public:
  InvariantViolation(long period, const std::string& what)
      : std::runtime_error("period " + std::to_string(period) + ": " + what), period_(period) {}
  long period() const { return period_; }

 private:
  long period_;
};

struct PeriodOutcome {
  long period = 0;   // 1-based
  long I = 0;        // on-hand at the start of the period
  long B_prev = 0;   // backlog carried into the period
  long arrived = 0;  // pipeline head received this period
  long D = 0;
  long Q = 0;
  long sales = 0;
  long U = 0;  // unmet after fulfillment
  long L = 0;  // lost customers
  long B = 0;  // survivors carried forward
  long N = 0;  // net inventory I + arrived - B_prev
  long IP = 0; // inventory position before ordering
  long O = 0;  // overshoot over the policy level
  double profit = 0.0;
};

struct Trace {
  long tau = 0;
  long level = 0;
  std::vector<PeriodOutcome> periods;
  double cumulative_profit = 0.0;
  SystemState final_state;

  std::size_t size() const { return periods.size(); }
  const PeriodOutcome& at(long period) const { return periods.at(static_cast<std::size_t>(period - 1)); }
};

// One period of the event sequence. `survivors(u)` returns how many of the u
// unmet customers stay. For tau = 0 the order Q arrives in the same period.
template <class Survivors>
PeriodOutcome step(SystemState& st, long Q, long D, Survivors&& survivors, double r, double h) {
  if (Q < 0) throw std::invalid_argument("order quantity must be nonnegative");
  if (D < 0) throw std::invalid_argument("demand must be nonnegative");
  PeriodOutcome out;
  out.I = st.I;
  out.B_prev = st.B;
  out.D = D;
  out.Q = Q;
  out.IP = st.inventory_position();
  long arrived;
  if (st.pipeline.empty()) {
    arrived = Q;
  } else {
    arrived = st.pipeline.front();
    for (std::size_t k = 1; k < st.pipeline.size(); ++k) st.pipeline[k - 1] = st.pipeline[k];
    st.pipeline.back() = Q;
  }
  out.arrived = arrived;
  const long available = st.I + arrived;
  const long wanted = st.B + D;
  out.N = available - st.B;
  out.sales = std::min(available, wanted);
  out.U = std::max(0L, wanted - available);
  const long stay = survivors(out.U);
  if (stay < 0 || stay > out.U) throw std::logic_error("survivor count outside [0, unmet]");
  out.B = stay;
  out.L = out.U - stay;
  const long left = std::max(0L, available - wanted);
  out.profit = r * static_cast<double>(out.sales) - h * static_cast<double>(left);
  st.I = left;
  st.B = stay;
  return out;
}

PeriodOutcome step(SystemState& st, long Q, long D, double p, Rng& patience, double r, double h);

// Runs `horizon` periods, calling visit(outcome) after each.
template <class Visit>
void run_periods(const SystemConfig& cfg, const Policy& policy, long horizon, SystemState& st,
                 Rng& demand_rng, Rng& patience_rng, Visit&& visit) {
  const double p = cfg.p;
  auto survivors = [&](long u) { return sample_survivors(p, u, patience_rng); };
  const long level = policy.level();
  for (long i = 1; i <= horizon; ++i) {
    const long Q = policy.order(st);
    const long D = cfg.demand.sample(demand_rng);
    PeriodOutcome out = step(st, Q, D, survivors, cfg.r, cfg.h);
    out.period = i;
    out.O = std::max(0L, out.IP - level);
    visit(out);
  }
}

Trace simulate(const SystemConfig& cfg, const Policy& policy, long horizon, const SystemState& initial,
               Rng& demand_rng, Rng& patience_rng);
Trace simulate(const SystemConfig& cfg, const Policy& policy, long horizon, const SystemState& initial,
               std::uint64_t seed, std::uint64_t replication = 0);

long overshoot(const SystemState& state, long s);

struct CoupledTraces {
  Trace P;
  Trace B;  // full backlog, p = 1
  Trace L;  // lost sales, p = 0
};

// Three systems under the same base-stock level and demand path. Throws
// InvariantViolation (with the period) if the sandwich relations break.
CoupledTraces simulate_coupled(const SystemConfig& cfg, long s, long horizon, std::uint64_t seed,
                               std::uint64_t replication = 0);

// Overshoot domination by the backlog at the last under-level period.
std::optional<long> overshoot_bound_violation(const Trace& trace, long s);
bool overshoot_bound_check(const Trace& trace, long s);

// N_{i+1} = N_i + Q_{i+1-tau} - D_i + L_i; returns the first failing period.
std::optional<long> conservation_violation(const Trace& trace);
// sales + U = B_prev + D, B <= U, I*B = 0 at every period.
std::optional<long> flow_violation(const Trace& trace);
// Same demand path, tau = 0: block-wise profit comparisons of a base-stock
// trace against an (s,q) trace started from the same state.
std::optional<long> sq_block_violation(const Trace& base, const Trace& sq, long s, long q, double r,
                                       double h);

void write_trace_csv(std::ostream& os, const Trace& trace);

}  // namespace pblab
