#include "estimator.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "errors.hpp"
#include "sampling.hpp"

namespace attacklab {
namespace {

void validate_config(const EstimatorConfig& cfg, const Projection& p) {
  if (cfg.B < 1) fail(ErrorKind::invalid_argument, "estimator: B must be >= 1");
  if (!(cfg.delta > 0.0)) fail(ErrorKind::invalid_argument, "estimator: delta must be > 0");
  if (cfg.sampling_mode == SamplingMode::orthonormal_frame && cfg.B > p.n())
    fail(ErrorKind::invalid_argument,
         "estimator: orthonormal_frame needs B <= n (B=" + std::to_string(cfg.B) +
             ", n=" + std::to_string(p.n()) + ")");
}

}  // namespace

GradientEstimate estimate_raw_with_directions(const Projection& p, DifferenceOracle& oracle,
                                              const EstimatorConfig& cfg,
                                              std::vector<Vec> directions) {
  validate_config(cfg, p);
  if (directions.size() != cfg.B)
    fail(ErrorKind::invalid_argument, "estimator: need exactly B directions");
  for (const Vec& u : directions) require_dim(u, p.n(), "sample direction");

  GradientEstimate e;
  e.samples = std::move(directions);
  e.signs.reserve(cfg.B);
  const std::uint64_t ties_before = oracle.tie_count();
  Vec acc(p.n());
  for (std::size_t i = 0; i < cfg.B; ++i) {
    const Vec& u = e.samples[i];
    const Vec probe = add(p.boundary_image(), p.direction(scale(u, cfg.delta)));
    const int s = oracle.query_sign(probe);
    e.signs.push_back(s);
    axpy(acc, static_cast<double>(s), u);
  }
  e.raw_low = scale(acc, 1.0 / static_cast<double>(cfg.B));
  e.queries_used = cfg.B;
  e.had_zero_tie = oracle.tie_count() > ties_before;
  return e;
}

GradientEstimate estimate_raw(const Projection& p, DifferenceOracle& oracle,
                              const EstimatorConfig& cfg, Rng& rng) {
  validate_config(cfg, p);
  std::vector<Vec> dirs;
  dirs.reserve(cfg.B);
  if (cfg.sampling_mode == SamplingMode::orthonormal_frame) {
    const Mat frame = sample_orthonormal_frame(p.n(), cfg.B, rng);
    for (std::size_t j = 0; j < cfg.B; ++j) dirs.push_back(frame.col(j));
  } else {
    for (std::size_t i = 0; i < cfg.B; ++i) dirs.push_back(sample_unit_sphere(p.n(), rng));
  }
  return estimate_raw_with_directions(p, oracle, cfg, std::move(dirs));
}

void lift_estimate(const Projection& p, GradientEstimate& e, const EstimatorConfig& cfg) {
  if (e.raw_low.dim() == 0)
    fail(ErrorKind::precondition, "lift: raw estimate missing");
  if (cfg.lift_mode == LiftMode::precise) {
    e.lifted = matvec(p.jacobian_at_base(), e.raw_low);
    return;
  }
  Vec acc(p.m());
  for (std::size_t i = 0; i < e.samples.size(); ++i)
    axpy(acc, static_cast<double>(e.signs[i]), p.direction(e.samples[i]));
  e.lifted = scale(acc, 1.0 / static_cast<double>(e.samples.size()));
}

double omega_proxy(const Projection& p, const GradientEstimate& e) {
  if (e.lifted.dim() == 0) fail(ErrorKind::precondition, "omega_proxy: lift missing");
  if (e.samples.empty()) return 0.0;
  std::size_t disagreements = 0;
  for (std::size_t i = 0; i < e.samples.size(); ++i) {
    const Vec d = p.direction(e.samples[i]);
    const int sign_cos = (dot(e.lifted, d) >= 0.0) ? +1 : -1;
    if (sign_cos != e.signs[i]) ++disagreements;
  }
  return static_cast<double>(disagreements) / static_cast<double>(e.samples.size());
}

double cosine_to_truth(const GradientEstimate& e, const GroundTruth& truth, const Vec& x_b) {
  if (e.lifted.dim() == 0) fail(ErrorKind::precondition, "cosine: lift missing");
  const Vec g = truth.gradient(x_b);
  const double gn = norm(g);
  if (!(gn > 0.0))
    fail(ErrorKind::invalid_argument, "cosine: true gradient vanishes at the boundary image");
  const double ln = norm(e.lifted);
  if (ln == 0.0) return 0.0;
  return dot(e.lifted, g) / (ln * gn);
}

GradientEstimate estimate_gradient(const Projection& p, DifferenceOracle& oracle,
                                   const EstimatorConfig& cfg, Rng& rng) {
  GradientEstimate e = estimate_raw(p, oracle, cfg, rng);
  lift_estimate(p, e, cfg);
  e.omega_proxy = omega_proxy(p, e);
  return e;
}

}  // namespace attacklab
