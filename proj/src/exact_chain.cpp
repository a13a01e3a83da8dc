#include "pblab/exact_chain.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

#include "pblab/demand.hpp"
#include "pblab/kernels.hpp"

namespace pblab {

long ExactChain::index(long I, long B) const {
  if (I < 0 || I > i_max || B < 0 || B > b_max || (I > 0 && B > 0)) return -1;
  // States with B = 0 come first, ordered by I, then (0, B) for B >= 1.
  return B == 0 ? I : i_max + B;
}

ExactChain build_exact_chain(const SystemConfig& cfg, const Policy& policy, long b_max) {
  cfg.validate();
  if (cfg.tau != 0) throw std::invalid_argument("exact chain supports tau = 0 only");
  if (b_max < 0) throw std::invalid_argument("b_max must be nonnegative");
  ExactChain ch;
  ch.i_max = policy.ceiling();
  ch.b_max = b_max;
  for (long I = 0; I <= ch.i_max; ++I) ch.states.emplace_back(I, 0);
  for (long B = 1; B <= b_max; ++B) ch.states.emplace_back(0, B);
  const std::size_t n = ch.size();
  ch.matrix.assign(n * n, 0.0);
  ch.reward.assign(n, 0.0);
  const auto& pmf = cfg.demand.pmf_table();
  const long cap = cfg.demand.cap();
  std::vector<std::vector<double>> survivors(static_cast<std::size_t>(b_max + cap + 1));
  auto surv = [&](long u) -> const std::vector<double>& {
    auto& v = survivors.at(static_cast<std::size_t>(u));
    if (v.empty()) v = binomial_pmf(u, cfg.p);
    return v;
  };
  for (std::size_t x = 0; x < n; ++x) {
    const auto [I, B] = ch.states[x];
    SystemState st{I, B, {}};
    const long avail = I + policy.order(st);
    double* row = &ch.matrix[x * n];
    for (long D = 0; D <= cap; ++D) {
      const double pd = pmf[static_cast<std::size_t>(D)];
      if (pd == 0.0) continue;
      const long wanted = B + D;
      const long sales = std::min(avail, wanted);
      const long left = std::max(0L, avail - wanted);
      ch.reward[x] += pd * (cfg.r * static_cast<double>(sales) - cfg.h * static_cast<double>(left));
      if (left > 0) {
        const long y = ch.index(left, 0);
        if (y < 0) throw std::logic_error("on-hand exceeds the policy ceiling");
        row[y] += pd;
        continue;
      }
      const long u = wanted - sales;
      const auto& sv = surv(u);
      for (long k = 0; k <= u; ++k) row[ch.index(0, std::min(k, b_max))] += pd * sv[static_cast<std::size_t>(k)];
    }
  }
  return ch;
}

std::vector<double> stationary_distribution(const ExactChain& chain) {
  const auto n = static_cast<Eigen::Index>(chain.size());
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> P(chain.matrix.data(), n, n);
  // (P^T - I) pi = 0 with the last equation replaced by normalization.
  Eigen::MatrixXd A = P.transpose() - Eigen::MatrixXd::Identity(n, n);
  A.row(n - 1).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  rhs(n - 1) = 1.0;
  Eigen::VectorXd pi = A.fullPivLu().solve(rhs);
  std::vector<double> out(pi.data(), pi.data() + n);
  for (double& v : out) v = std::max(v, 0.0);
  double total = 0.0;
  for (double v : out) total += v;
  for (double& v : out) v /= total;
  return out;
}

std::vector<double> tv_distances(const ExactChain& chain, const std::vector<double>& pi, long I0, long B0,
                                 long steps) {
  const long x = chain.index(I0, B0);
  if (x < 0) throw std::invalid_argument("start state outside the chain");
  const std::size_t n = chain.size();
  std::vector<double> dist(n, 0.0), next(n);
  dist[static_cast<std::size_t>(x)] = 1.0;
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(steps));
  for (long i = 1; i <= steps; ++i) {
    out.push_back(kernels::l1_distance(dist.data(), pi.data(), n));
    kernels::vecmat(dist.data(), chain.matrix.data(), n, n, next.data());
    dist.swap(next);
  }
  return out;
}

double stationary_reward(const ExactChain& chain, const std::vector<double>& pi) {
  return kernels::dot(pi.data(), chain.reward.data(), chain.size());
}

double boundary_mass(const ExactChain& chain, const std::vector<double>& pi) {
  return pi.at(static_cast<std::size_t>(chain.index(0, chain.b_max)));
}

}  // namespace pblab
