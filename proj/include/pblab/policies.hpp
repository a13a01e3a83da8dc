#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>

#include "json.hpp"
#include "pblab/demand.hpp"
#include "pblab/state.hpp"

namespace pblab {

long base_stock_order(const SystemState& state, long s);
// Backlog-blind rule: never reads B.
long sq_order(long on_hand, std::span<const long> pipeline, long s, long q);

// Smallest x with P[D <= x] >= (1-p) r / ((1-p) r + h).
long optimal_zero_lt_level(const DemandModel& demand, double r, double h, double p);
// Newsvendor level on lead-time demand: smallest y with P[D_1 + ... + D_{tau+1} <= y] >= b/(b+h).
// r only enters through the caller's choice of b.
long b_system_level(const DemandModel& demand, long tau, double r, double h, double b);
long b_system_level(const DemandModel& lead_time, double h, double b);
double b1_backorder_cost(double r, double h, long tau);
double b2_backorder_cost(double r, double p, long tau);

class Policy {
 public:
  enum class Kind { base_stock, sq, custom };
  // A custom rule receives on-hand, pipeline, and the backlog only when it
  // declares that it observes the backlog.
  using Rule = std::function<long(long on_hand, std::span<const long> pipeline, std::optional<long> backlog)>;

  static Policy base_stock(long s);
  static Policy sq(long s, long q);
  static Policy custom(Rule rule, bool observes_backlog, std::string name = "custom");
  static Policy from_json(const nlohmann::json& j);

  Kind kind() const { return kind_; }
  long s() const { return s_; }
  long q() const { return q_; }
  bool observes_backlog() const { return observes_backlog_; }
  long order(const SystemState& state) const;
  // Reference level for overshoot reporting.
  long level() const { return s_; }
  // Largest on-hand plus pipeline reachable from a valid start.
  long ceiling() const { return s_ + q_; }
  std::string name() const;
  nlohmann::json to_json() const;

 private:
  Kind kind_ = Kind::base_stock;
  long s_ = 0;
  long q_ = 0;
  bool observes_backlog_ = true;
  Rule rule_;
  std::string name_;
};

}  // namespace pblab
