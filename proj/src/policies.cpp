#include "pblab/policies.hpp"

#include <numeric>
#include <stdexcept>

namespace pblab {

long base_stock_order(const SystemState& state, long s) {
  return std::max(0L, s - state.inventory_position());
}

long sq_order(long on_hand, std::span<const long> pipeline, long s, long q) {
  const long in_transit = std::accumulate(pipeline.begin(), pipeline.end(), 0L);
  const long target = s + (on_hand == 0 ? q : 0);
  return std::max(0L, target - on_hand - in_transit);
}

long optimal_zero_lt_level(const DemandModel& demand, double r, double h, double p) {
  const double margin = (1.0 - p) * r;
  return demand.quantile(margin / (margin + h));
}

long b_system_level(const DemandModel& lead_time, double h, double b) {
  if (!(b > 0.0)) throw std::invalid_argument("backorder cost must be positive");
  return lead_time.quantile(b / (b + h));
}

long b_system_level(const DemandModel& demand, long tau, double r, double h, double b) {
  if (!(r > 0.0)) throw std::invalid_argument("r must be positive");
  return b_system_level(lead_time_demand(demand, tau + 1), h, b);
}

double b1_backorder_cost(double r, double h, long tau) { return r + static_cast<double>(tau) * h; }

double b2_backorder_cost(double r, double p, long tau) {
  return (1.0 - p) * r / (2.0 * (1.0 + static_cast<double>(tau)));
}

Policy Policy::base_stock(long s) {
  if (s < 0) throw std::invalid_argument("policy.s: must be nonnegative");
  Policy pol;
  pol.kind_ = Kind::base_stock;
  pol.s_ = s;
  pol.observes_backlog_ = true;
  return pol;
}

Policy Policy::sq(long s, long q) {
  if (s < 0) throw std::invalid_argument("policy.s: must be nonnegative");
  if (q < 0) throw std::invalid_argument("policy.q: must be nonnegative");
  Policy pol;
  pol.kind_ = Kind::sq;
  pol.s_ = s;
  pol.q_ = q;
  pol.observes_backlog_ = false;
  return pol;
}

Policy Policy::custom(Rule rule, bool observes_backlog, std::string name) {
  Policy pol;
  pol.kind_ = Kind::custom;
  pol.rule_ = std::move(rule);
  pol.observes_backlog_ = observes_backlog;
  pol.name_ = std::move(name);
  return pol;
}

long Policy::order(const SystemState& state) const {
  switch (kind_) {
    case Kind::base_stock:
      return base_stock_order(state, s_);
    case Kind::sq:
      return sq_order(state.I, state.pipeline, s_, q_);
    case Kind::custom: {
      std::optional<long> seen;
      if (observes_backlog_) seen = state.B;
      return rule_(state.I, state.pipeline, seen);
    }
  }
  return 0;
}

std::string Policy::name() const {
  switch (kind_) {
    case Kind::base_stock:
      return "base_stock(" + std::to_string(s_) + ")";
    case Kind::sq:
      return "sq(" + std::to_string(s_) + "," + std::to_string(q_) + ")";
    case Kind::custom:
      return name_;
  }
  return {};
}

nlohmann::json Policy::to_json() const {
  switch (kind_) {
    case Kind::base_stock:
      return {{"kind", "base_stock"}, {"s", s_}};
    case Kind::sq:
      return {{"kind", "sq"}, {"s", s_}, {"q", q_}};
    case Kind::custom:
      return {{"kind", "custom"}, {"name", name_}};
  }
  return {};
}

Policy Policy::from_json(const nlohmann::json& j) {
  auto fail = [](const std::string& what) { throw std::invalid_argument("policy." + what); };
  if (!j.is_object()) fail("(root): must be an object");
  if (!j.contains("kind") || !j["kind"].is_string()) fail("kind: missing or not a string");
  const std::string kind = j["kind"];
  auto level = [&](const char* key) {
    if (!j.contains(key) || !j[key].is_number_integer() || j[key].get<long>() < 0)
      fail(std::string(key) + ": must be a nonnegative integer");
    return j[key].get<long>();
  };
  if (kind == "base_stock") {
    for (auto it = j.begin(); it != j.end(); ++it)
      if (it.key() != "kind" && it.key() != "s") fail(it.key() + ": unknown key");
    return base_stock(level("s"));
  }
  if (kind == "sq") {
    for (auto it = j.begin(); it != j.end(); ++it)
      if (it.key() != "kind" && it.key() != "s" && it.key() != "q") fail(it.key() + ": unknown key");
    return sq(level("s"), level("q"));
  }
  fail("kind: unknown policy kind '" + kind + "'");
  throw std::logic_error("unreachable");
}

}  // namespace pblab
