#include "attack.hpp"

#include <cmath>
#include <cstdio>

#include "errors.hpp"
#include "rng.hpp"

namespace attacklab {

namespace {

Vec lerp_to_target(const Vec& x_hat, const Vec& x_tgt, double alpha) {
  Vec p(x_hat.dim());
  for (std::size_t i = 0; i < p.dim(); ++i)
    p[i] = alpha * x_tgt[i] + (1.0 - alpha) * x_hat[i];
  return p;
}

}  // namespace

void validate_attack_config(const AttackConfig& cfg) {
  if (cfg.budget < 1) fail(ErrorKind::invalid_argument, "attack: budget must be >= 1");
  if (!(cfg.theta > 0.0 && cfg.theta < 1.0))
    fail(ErrorKind::invalid_argument, "attack: theta must lie in (0, 1)");
  if (cfg.initial_B < 1) fail(ErrorKind::invalid_argument, "attack: initial_B must be >= 1");
  if (!(cfg.success_mse > 0.0))
    fail(ErrorKind::invalid_argument, "attack: success_mse must be > 0");
}

BisectResult binary_search_to_boundary(DifferenceOracle& oracle, const Vec& x_hat,
                                       const Vec& x_tgt, double theta, bool check_endpoints) {
  require_dim(x_tgt, x_hat.dim(), "binary search endpoints");
  if (!(theta > 0.0 && theta < 1.0))
    fail(ErrorKind::invalid_argument, "binary search: theta must lie in (0, 1)");
  const std::uint64_t start_count = oracle.query_count();
  if (check_endpoints) {
    if (oracle.query_sign(x_tgt) != -1)
      fail(ErrorKind::precondition, "binary search: trivial instance, the target point is already adversarial");
    if (oracle.query_sign(x_hat) != +1)
      fail(ErrorKind::precondition, "binary search: the start point is not adversarial");
  }
  double alpha_adv = 0.0;  // adversarial end; the start point itself
  double alpha_ben = 1.0;  // non-adversarial end; the target
  while (alpha_ben - alpha_adv > theta) {
    const double mid = 0.5 * (alpha_adv + alpha_ben);
    if (oracle.query_sign(lerp_to_target(x_hat, x_tgt, mid)) == +1)
      alpha_adv = mid;
    else
      alpha_ben = mid;
  }
  BisectResult r;
  r.alpha = alpha_adv;
  r.point = lerp_to_target(x_hat, x_tgt, alpha_adv);
  r.queries = oracle.query_count() - start_count;
  return r;
}

StepResult step_size_search(DifferenceOracle& oracle, const Vec& x_t, const Vec& direction,
                            double d_t, std::size_t t) {
  require_dim(direction, x_t.dim(), "step search inputs");
  if (std::abs(norm(direction) - 1.0) > 1e-10)
    fail(ErrorKind::invalid_argument, "step search: direction must be a unit vector");
  if (!(d_t > 0.0)) fail(ErrorKind::invalid_argument, "step search: d_t must be > 0");
  if (t < 1) fail(ErrorKind::invalid_argument, "step search: iteration index starts at 1");
  const std::uint64_t start_count = oracle.query_count();
  const double xi_min = 1e-12 * d_t;
  double xi = d_t / std::sqrt(static_cast<double>(t));
  StepResult r;
  while (xi >= xi_min) {
    Vec probe = x_t;
    axpy(probe, xi, direction);
    if (oracle.query_sign(probe) == +1) {
      r.x_hat = std::move(probe);
      r.xi = xi;
      r.progressed = true;
      r.queries = oracle.query_count() - start_count;
      return r;
    }
    xi *= 0.5;
  }
  r.x_hat = x_t;
  r.queries = oracle.query_count() - start_count;
  return r;
}

AttackResult run_attack(DifferenceOracle& oracle, const ProjectionFactory& factory,
                        const Vec& x_src, const Vec& x_tgt, const AttackConfig& cfg) {
  validate_attack_config(cfg);
  require_dim(x_tgt, x_src.dim(), "attack endpoints");
  if (x_src.dim() != oracle.dim())
    fail(ErrorKind::invalid_argument, "attack: point dimension does not match the oracle");
  if (!factory) fail(ErrorKind::invalid_argument, "attack: projection factory is empty");

  const std::size_t m = x_src.dim();
  BudgetedOracle guarded(oracle, cfg.budget);
  Rng root(cfg.seed);

  AttackResult res;
  res.x_adv = x_src;

  auto record = [&](const char* event, const Vec& at) {
    TraceRow row;
    row.queries = guarded.spent();
    row.l2 = distance(at, x_tgt);
    row.mse = row.l2 * row.l2 / static_cast<double>(m);
    row.event = event;
    res.trace.rows.push_back(std::move(row));
    res.traced_points.push_back(at);
  };
  // On truncation mid-phase every completed row is already flushed; add one
  // final row for the interrupted phase when it actually consumed queries.
  auto record_truncated = [&](const char* event) {
    if (!res.trace.rows.empty() && res.trace.rows.back().queries == guarded.spent()) return;
    record(event, res.x_adv);
  };

  const char* phase = "init";
  bool have_start = false;
  try {
    if (guarded.query_sign(x_src) != +1)
      fail(ErrorKind::precondition, "attack: the source point is not adversarial");
    if (guarded.query_sign(x_tgt) != -1)
      fail(ErrorKind::precondition, "attack: trivial instance, the target point is already adversarial");
    have_start = true;  // from here on x_src is a valid fallback answer

    BisectResult init =
        binary_search_to_boundary(guarded, x_src, x_tgt, cfg.theta, /*check_endpoints=*/false);
    res.x_adv = std::move(init.point);
    record("init", res.x_adv);

    for (std::size_t t = 1; cfg.max_iterations == 0 || t <= cfg.max_iterations; ++t) {
      if (guarded.remaining() == 0) {
        res.budget_exhausted = true;
        break;
      }
      const double d_t = distance(res.x_adv, x_tgt);
      if (d_t == 0.0) break;  // nothing left to shrink

      std::unique_ptr<Projection> proj = factory(res.x_adv);
      if (!proj) fail(ErrorKind::invalid_argument, "attack: projection factory returned null");
      if (proj->m() != m) fail(ErrorKind::invalid_argument, "attack: projection ambient dimension mismatch");

      EstimatorConfig est = cfg.estimator;
      const double bt = static_cast<double>(cfg.initial_B) * std::sqrt(static_cast<double>(t));
      est.B = std::min(proj->n(), static_cast<std::size_t>(bt));
      if (est.B < 1) est.B = 1;
      if (!(cfg.estimator.delta > 0.0))
        est.delta = cfg.theta * std::sqrt(static_cast<double>(m)) * d_t;

      Rng iter_rng = root.child(static_cast<std::uint64_t>(t));
      bool stepped = false;
      for (int attempt = 0; attempt < 2 && !stepped; ++attempt) {
        if (attempt == 1) est.delta *= 0.5;  // one retry with a tighter probe

        phase = "grad_est";
        Rng est_rng = iter_rng.child(static_cast<std::uint64_t>(attempt));
        GradientEstimate e = estimate_gradient(*proj, guarded, est, est_rng);
        record("grad_est", res.x_adv);

        const double lift_norm = norm(e.lifted);
        if (lift_norm == 0.0) continue;  // no usable direction from this batch

        phase = "step";
        StepResult step =
            step_size_search(guarded, res.x_adv, scale(e.lifted, 1.0 / lift_norm), d_t, t);
        record("step", step.progressed ? step.x_hat : res.x_adv);
        if (!step.progressed) continue;

        phase = "binsearch";
        BisectResult bs = binary_search_to_boundary(guarded, step.x_hat, x_tgt, cfg.theta,
                                                    /*check_endpoints=*/false);
        res.x_adv = std::move(bs.point);
        record("binsearch", res.x_adv);
        stepped = true;
      }
      res.iterations = t;
    }
  } catch (const BudgetExhausted&) {
    res.budget_exhausted = true;
    if (have_start) record_truncated(phase);
  }

  res.queries_spent = guarded.spent();
  res.final_l2 = distance(res.x_adv, x_tgt);
  res.final_mse = res.final_l2 * res.final_l2 / static_cast<double>(m);
  res.trace.success = res.final_mse <= cfg.success_mse;
  return res;
}

std::string trace_to_csv(const AttackTrace& trace) {
  std::string out = "queries,l2,mse,event\n";
  char buf[128];
  for (const TraceRow& row : trace.rows) {
    std::snprintf(buf, sizeof(buf), "%llu,%.17g,%.17g,", static_cast<unsigned long long>(row.queries),
                  row.l2, row.mse);
    out += buf;
    out += row.event;
    out += '\n';
  }
  return out;
}

}  // namespace attacklab
