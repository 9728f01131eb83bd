#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "estimator.hpp"
#include "projections.hpp"
#include "vec.hpp"
#include "victims.hpp"

namespace attacklab {

// Thrown (internally) when a guarded oracle runs out of queries; run_attack
// converts it into a clean truncated trace.
struct BudgetExhausted {};

// Forwards sign queries until the budget is spent, then throws
// BudgetExhausted. spent() counts only forwarded queries and is the
// authoritative total (the base-class counter also counts the attempt that
// hit the limit).
class BudgetedOracle final : public DifferenceOracle {
 public:
  BudgetedOracle(DifferenceOracle& inner, std::uint64_t budget)
      : DifferenceOracle(inner.dim(), inner.y_ben(), inner.y_mal()),
        inner_(inner),
        budget_(budget) {}

  std::uint64_t spent() const { return used_; }
  std::uint64_t remaining() const { return budget_ - used_; }

 private:
  int sign_at(const Vec& x) override {
    if (used_ == budget_) throw BudgetExhausted{};
    ++used_;
    return inner_.query_sign(x);
  }

  DifferenceOracle& inner_;
  std::uint64_t budget_;
  std::uint64_t used_ = 0;
};

struct AttackConfig {
  std::uint64_t budget = 0;        // total sign queries allowed
  double theta = 1e-3;             // binary-search precision on alpha
  std::size_t initial_B = 10;      // B_t = initial_B * sqrt(t), capped at n
  std::size_t max_iterations = 0;  // 0 = run until the budget is gone
  std::uint64_t seed = 0;
  double success_mse = 1e-4;       // final-MSE success threshold
  EstimatorConfig estimator;       // sampling/lift template; B is set per
                                   // iteration; delta > 0 pins the probe
                                   // radius, otherwise theta*sqrt(m)*d_t
};

// Rejects out-of-range fields; run_attack calls this itself, but callers that
// spend oracle queries before the attack (pair sampling) validate up front.
void validate_attack_config(const AttackConfig& cfg);

struct TraceRow {
  std::uint64_t queries = 0;
  double l2 = 0.0;
  double mse = 0.0;
  std::string event;  // init | grad_est | step | binsearch
};

struct AttackTrace {
  std::vector<TraceRow> rows;
  bool success = false;
};

struct BisectResult {
  Vec point;
  double alpha = 0.0;
  std::uint64_t queries = 0;
};

// Bisects alpha over x(alpha) = alpha x_tgt + (1 - alpha) x_hat down to
// precision theta and returns the adversarial endpoint. check_endpoints
// verifies the two preconditions with two extra queries.
BisectResult binary_search_to_boundary(DifferenceOracle& oracle, const Vec& x_hat,
                                       const Vec& x_tgt, double theta,
                                       bool check_endpoints = true);

struct StepResult {
  Vec x_hat;
  double xi = 0.0;
  std::uint64_t queries = 0;
  bool progressed = false;
};

// Geometric step-size search along a unit direction: xi starts at
// d_t / sqrt(t) and halves until the probe is adversarial or xi underflows
// 1e-12 * d_t (flagged no-progress, x_t returned unchanged).
StepResult step_size_search(DifferenceOracle& oracle, const Vec& x_t, const Vec& direction,
                            double d_t, std::size_t t);

using ProjectionFactory = std::function<std::unique_ptr<Projection>(const Vec& x_b)>;

struct AttackResult {
  AttackTrace trace;
  std::vector<Vec> traced_points;  // position behind each trace row (diagnostics)
  Vec x_adv;
  double final_l2 = 0.0;
  double final_mse = 0.0;
  std::uint64_t queries_spent = 0;
  std::size_t iterations = 0;
  bool budget_exhausted = false;
};

// Full loop: init bisection between source and target, then per iteration
// gradient estimate -> step -> bisection back to the boundary, one trace row
// per event. On a failed step the iteration retries once with the probe
// radius halved, then gives up. Runs until the budget, max_iterations, or
// exact convergence.
AttackResult run_attack(DifferenceOracle& oracle, const ProjectionFactory& factory,
                        const Vec& x_src, const Vec& x_tgt, const AttackConfig& cfg);

// CSV rendering: header queries,l2,mse,event; floats at 17 significant digits.
std::string trace_to_csv(const AttackTrace& trace);

}  // namespace attacklab
