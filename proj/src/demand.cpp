#include "pblab/demand.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "pblab/kernels.hpp"

namespace pblab {

namespace {

constexpr double kPoissonTail = 1e-9;
constexpr long kMaxSupport = 1'000'000;

double poisson_log_pmf(double rate, long k) {
  return static_cast<double>(k) * std::log(rate) - rate - std::lgamma(static_cast<double>(k) + 1.0);
}

std::string format_real(double x) {
  std::string s = std::to_string(x);
  s.erase(s.find_last_not_of('0') + 1);
  if (!s.empty() && s.back() == '.') s.pop_back();
  return s;
}

}  // namespace

std::vector<double> binomial_pmf(long n, double p) {
  if (n < 0) throw std::invalid_argument("binomial trials must be nonnegative");
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("binomial success must lie in [0,1]");
  std::vector<double> out(static_cast<std::size_t>(n) + 1, 0.0);
  if (p == 0.0) { out[0] = 1.0; return out; }
  if (p == 1.0) { out[n] = 1.0; return out; }
  if (n <= 1000) {
    double coef = 1.0;
    for (long k = 0; k <= n; ++k) {
      out[k] = coef * std::pow(p, static_cast<double>(k)) * std::pow(1.0 - p, static_cast<double>(n - k));
      coef = coef * static_cast<double>(n - k) / static_cast<double>(k + 1);
    }
  } else {
    const double lp = std::log(p), lq = std::log1p(-p);
    const double ln = std::lgamma(static_cast<double>(n) + 1.0);
    for (long k = 0; k <= n; ++k)
      out[k] = std::exp(ln - std::lgamma(k + 1.0) - std::lgamma(static_cast<double>(n - k) + 1.0) +
                        k * lp + (n - k) * lq);
  }
  return out;
}

DemandModel::DemandModel(DemandFamily family, std::vector<double> pmf, std::string label,
                         nlohmann::json spec)
    : family_(family), pmf_(std::move(pmf)), label_(std::move(label)), spec_(std::move(spec)) {
  if (pmf_.empty()) throw std::invalid_argument("demand pmf is empty");
  double total = 0.0;
  for (double v : pmf_) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument("demand pmf has a negative or non-finite entry");
    total += v;
  }
  if (std::fabs(total - 1.0) > 1e-9) throw std::invalid_argument("demand pmf does not sum to 1");
  for (double& v : pmf_) v /= total;
  cdf_.resize(pmf_.size());
  std::partial_sum(pmf_.begin(), pmf_.end(), cdf_.begin());
  cdf_.back() = 1.0;
  for (std::size_t k = 0; k < pmf_.size(); ++k) mean_ += static_cast<double>(k) * pmf_[k];
  for (std::size_t k = 0; k < pmf_.size(); ++k) {
    const double dev = static_cast<double>(k) - mean_;
    variance_ += dev * dev * pmf_[k];
  }
}

DemandModel DemandModel::poisson(double rate, std::optional<long> cap) {
  if (!(rate > 0.0) || !std::isfinite(rate)) throw std::invalid_argument("poisson rate must be positive");
  long limit = 0;
  if (cap) {
    if (*cap < 1) throw std::invalid_argument("poisson cap must be a positive integer");
    limit = *cap;
  } else {
    double acc = 0.0;
    while (true) {
      acc += std::exp(poisson_log_pmf(rate, limit));
      if (acc >= 1.0 - kPoissonTail) break;
      if (++limit > kMaxSupport) throw std::invalid_argument("poisson rate too large");
    }
    limit = std::max(limit, 1L);
  }
  std::vector<double> pmf(static_cast<std::size_t>(limit) + 1);
  double below = 0.0;
  for (long k = 0; k < limit; ++k) {
    pmf[k] = std::exp(poisson_log_pmf(rate, k));
    below += pmf[k];
  }
  pmf[limit] = std::max(0.0, 1.0 - below);
  nlohmann::json spec{{"family", "poisson"}, {"rate", rate}, {"cap", limit}};
  return DemandModel(DemandFamily::poisson, std::move(pmf), "poisson:" + format_real(rate), spec);
}

DemandModel DemandModel::binomial(long trials, double success) {
  if (trials < 1) throw std::invalid_argument("binomial n must be a positive integer");
  if (!(success >= 0.0 && success <= 1.0)) throw std::invalid_argument("binomial p must lie in [0,1]");
  nlohmann::json spec{{"family", "binomial"}, {"n", trials}, {"p", success}};
  return DemandModel(DemandFamily::binomial, binomial_pmf(trials, success),
                     "binomial:" + std::to_string(trials) + ":" + format_real(success), spec);
}

DemandModel DemandModel::categorical(std::vector<double> pmf) {
  nlohmann::json spec{{"family", "categorical"}, {"pmf", pmf}};
  const std::string label = "categorical:" + std::to_string(pmf.size());
  return DemandModel(DemandFamily::categorical, std::move(pmf), label, spec);
}

DemandModel DemandModel::from_json(const nlohmann::json& j) {
  auto fail = [](const std::string& what) { throw std::invalid_argument("demand." + what); };
  if (!j.is_object()) fail("(root): must be an object");
  if (!j.contains("family") || !j["family"].is_string()) fail("family: missing or not a string");
  const std::string fam = j["family"];
  auto require_only = [&](std::initializer_list<const char*> keys) {
    for (auto it = j.begin(); it != j.end(); ++it) {
      if (std::find_if(keys.begin(), keys.end(), [&](const char* k) { return it.key() == k; }) == keys.end())
        fail(it.key() + ": unknown key");
    }
  };
  if (fam == "poisson") {
    require_only({"family", "rate", "cap"});
    if (!j.contains("rate") || !j["rate"].is_number() || !(j["rate"].get<double>() > 0.0))
      fail("rate: must be a positive number");
    std::optional<long> cap;
    if (j.contains("cap")) {
      if (!j["cap"].is_number_integer() || j["cap"].get<long>() < 1) fail("cap: must be a positive integer");
      cap = j["cap"].get<long>();
    }
    return poisson(j["rate"].get<double>(), cap);
  }
  if (fam == "binomial") {
    require_only({"family", "n", "p"});
    if (!j.contains("n") || !j["n"].is_number_integer() || j["n"].get<long>() < 1)
      fail("n: must be a positive integer");
    if (!j.contains("p") || !j["p"].is_number() || j["p"].get<double>() < 0.0 || j["p"].get<double>() > 1.0)
      fail("p: must be a probability");
    return binomial(j["n"].get<long>(), j["p"].get<double>());
  }
  if (fam == "categorical") {
    require_only({"family", "pmf"});
    if (!j.contains("pmf") || !j["pmf"].is_array() || j["pmf"].empty()) fail("pmf: must be a nonempty array");
    std::vector<double> pmf;
    for (const auto& v : j["pmf"]) {
      if (!v.is_number() || v.get<double>() < 0.0) fail("pmf: entries must be nonnegative numbers");
      pmf.push_back(v.get<double>());
    }
    try {
      return categorical(std::move(pmf));
    } catch (const std::invalid_argument& e) {
      fail(std::string("pmf: ") + e.what());
    }
  }
  fail("family: unknown family '" + fam + "'");
  throw std::logic_error("unreachable");
}

nlohmann::json DemandModel::to_json() const { return spec_; }
std::string DemandModel::label() const { return label_; }

double DemandModel::pmf(long k) const {
  if (k < 0 || k > cap()) return 0.0;
  return pmf_[k];
}

double DemandModel::cdf(long k) const {
  if (k < 0) return 0.0;
  if (k >= cap()) return 1.0;
  return cdf_[k];
}

long DemandModel::quantile(double prob) const {
  const double target = prob - 1e-12;
  auto it = std::find_if(cdf_.begin(), cdf_.end(), [&](double c) { return c >= target; });
  return static_cast<long>(it - cdf_.begin());
}

double DemandModel::expected_shortfall_below(long level) const {
  if (level <= 0) return 0.0;
  const std::size_t n = std::min<std::size_t>(pmf_.size(), static_cast<std::size_t>(level));
  return kernels::positive_part_mean(pmf_.data(), n, static_cast<double>(level));
}

long DemandModel::sample(Rng& rng) const {
  const double u = rng.uniform();
  auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  if (it == cdf_.end()) --it;
  return static_cast<long>(it - cdf_.begin());
}

long sample_demand(const DemandModel& model, Rng& rng) { return model.sample(rng); }

DemandModel lead_time_demand(const DemandModel& model, long horizon) {
  if (horizon < 1) throw std::invalid_argument("lead-time horizon must be at least 1");
  std::vector<double> acc = model.pmf_table();
  std::vector<double> buf;
  for (long i = 1; i < horizon; ++i) {
    buf.assign(acc.size() + model.pmf_table().size() - 1, 0.0);
    kernels::convolve(acc.data(), acc.size(), model.pmf_table().data(), model.pmf_table().size(), buf.data());
    acc.swap(buf);
  }
  double total = std::accumulate(acc.begin(), acc.end(), 0.0);
  for (double& v : acc) v /= total;
  nlohmann::json spec{{"family", "categorical"}, {"pmf", acc}};
  return DemandModel(DemandFamily::categorical, std::move(acc),
                     model.label() + "*" + std::to_string(horizon), spec);
}

long sample_survivors(double p, long unmet, Rng& rng) {
  if (unmet < 0) throw std::invalid_argument("unmet count must be nonnegative");
  if (unmet == 0 || p <= 0.0) return 0;
  if (p >= 1.0) return unmet;
  const bool flip = p > 0.5;
  const double q = flip ? 1.0 - p : p;
  long k = 0;
  if (unmet < 500 && static_cast<double>(unmet) * q < 30.0) {
    // Inversion: walk the Binomial(unmet, q) cdf.
    const double ratio = q / (1.0 - q);
    double prob = std::pow(1.0 - q, static_cast<double>(unmet));
    double cum = prob;
    const double u = rng.uniform();
    while (u >= cum && k < unmet) {
      prob *= ratio * static_cast<double>(unmet - k) / static_cast<double>(k + 1);
      ++k;
      cum += prob;
    }
  } else {
    std::binomial_distribution<long> dist(unmet, q);
    k = dist(rng.engine());
  }
  return flip ? unmet - k : k;
}

}  // namespace pblab
