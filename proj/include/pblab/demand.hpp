#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "pblab/rng.hpp"

namespace pblab {

enum class DemandFamily { poisson, binomial, categorical };

// Discrete demand on {0, ..., cap}. Poisson tails above the cap are folded
// onto the cap so that P[D <= cap] = 1 exactly.
class DemandModel {
 public:
  static DemandModel poisson(double rate, std::optional<long> cap = std::nullopt);
  static DemandModel binomial(long trials, double success);
  static DemandModel categorical(std::vector<double> pmf);
  static DemandModel from_json(const nlohmann::json& j);

  nlohmann::json to_json() const;
  std::string label() const;

  DemandFamily family() const { return family_; }
  long cap() const { return static_cast<long>(pmf_.size()) - 1; }
  double mean() const { return mean_; }
  double variance() const { return variance_; }
  double alpha0() const { return pmf_[0]; }
  double alpha1() const { return pmf_.size() > 1 ? pmf_[1] : 0.0; }

  double pmf(long k) const;
  double cdf(long k) const;
  const std::vector<double>& pmf_table() const { return pmf_; }
  const std::vector<double>& cdf_table() const { return cdf_; }

  // Smallest k with cdf(k) >= prob (ties resolve downward within 1e-12).
  long quantile(double prob) const;
  // E[(level - D)^+].
  double expected_shortfall_below(long level) const;

  long sample(Rng& rng) const;

 private:
  DemandModel(DemandFamily family, std::vector<double> pmf, std::string label,
              nlohmann::json spec);
  DemandFamily family_;
  std::vector<double> pmf_;
  std::vector<double> cdf_;
  double mean_ = 0.0;
  double variance_ = 0.0;
  std::string label_;
  nlohmann::json spec_;

  friend DemandModel lead_time_demand(const DemandModel& model, long horizon);
};

long sample_demand(const DemandModel& model, Rng& rng);

// Distribution of the sum of `horizon` i.i.d. copies, by iterated convolution.
DemandModel lead_time_demand(const DemandModel& model, long horizon);

// Number of the `unmet` backlogged customers who stay, Binomial(unmet, p).
long sample_survivors(double p, long unmet, Rng& rng);

// Binomial(n, p) pmf over 0..n.
std::vector<double> binomial_pmf(long n, double p);

}  // namespace pblab
