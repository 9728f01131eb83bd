#ifndef ATTACKLAB_THEORY_HPP
#define ATTACKLAB_THEORY_HPP

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "estimator.hpp"
#include "projections.hpp"
#include "rng.hpp"
#include "vec.hpp"
#include "victims.hpp"

namespace attacklab {

// Local regularity constants of a projection/victim pair plus the estimator
// geometry they feed: f is L_f-Lipschitz, beta_f-smooth; S is L_S-Lipschitz,
// beta_S-smooth; probes have radius delta; the estimator samples B of n
// latent directions.  proj_align is the norm of the Jacobian-projected
// gradient and grad_norm the norm of the true gradient at the base point.
struct SmoothnessProfile {
  double L_f = 1.0;
  double l_f = 1.0;
  double beta_f = 0.0;
  double L_S = 1.0;
  double beta_S = 0.0;
  double delta = 0.1;
  std::size_t n = 2;
  std::size_t B = 2;
  double proj_align = 1.0;
  double grad_norm = 1.0;
};

struct CosineBounds {
  double lower = 0.0;
  double upper = 0.0;
  // First-order relaxation of the lower bound's inner term, scaled by the
  // same alignment/sqrt(B/n) prefactor; always <= lower.
  double relaxed_lower = 0.0;
};

// Dimension constant 2*sqrt(n) / (Beta((n-1)/2, 1/2) * (n-1)), n >= 2.
double compute_cn(std::size_t n);

// Density of the inner product between one sampled orthonormal direction and
// a fixed unit vector in R^n: (1 - x^2)^((n-3)/2) / Beta((n-1)/2, 1/2) on
// [-1, 1].  For n = 2 the density diverges at the endpoints; those points
// return the sentinel 1e308 rather than infinity.
double pa_pdf(std::size_t n, double x);

// CDF of pa_pdf by adaptive quadrature (absolute error < 1e-9); evaluated
// through the substitution x = sin(theta) so the n = 2 endpoint singularity
// never enters the integrand.  pa_cdf(n, 0) is exactly 1/2.
double pa_cdf(std::size_t n, double x);

// Estimation-quality indicator omega combining delta with the regularity
// constants; the general nonlinear-projection form.
double compute_omega(const SmoothnessProfile& p);

// Sharper omega available for the curvature-bent construction
// (constructed_nonlinear_b); strictly below the linear-case omega whenever
// beta_f, beta_S, delta, L_f are all positive.
double compute_omega_thm2(const SmoothnessProfile& p);

// Expected-cosine sandwich for the lifted estimate:
//   (2(1 - w^2/a^2)^((n-1)/2) - 1) * (a/(L_f g)) * sqrt(B/n) * c_n
//     <= E cos <= (a/(l_f g)) * sqrt(B/n) * c_n
// with a = proj_align, g = grad_norm, w = omega.  Requires omega <= a.
CosineBounds theorem1_bounds(const SmoothnessProfile& p, double omega);

struct Lemma1Report {
  std::size_t n = 0;
  std::size_t samples = 0;
  double ks = 0.0;
  double critical = 0.0;  // 1% level: 1.63/sqrt(samples)
  bool pass = false;
};

// Draws <u, v> for u uniform on the sphere and fixed unit v and compares the
// empirical CDF against pa_cdf.
Lemma1Report verify_lemma1(std::size_t n, std::size_t samples, Rng& rng);

struct Lemma4Report {
  std::size_t n_max = 0;
  double min_margin_above = 0.0;  // min over n of c_n - 2/pi
  double min_margin_below = 0.0;  // min over n of 1 - c_n
  double min_margin_mono = 0.0;   // min over n of c_n - c_{n+2}
  double c2_error = 0.0;          // |c_2 - 2 sqrt(2)/pi|
  bool pass = false;
};

// Checks 2/pi < c_n < 1 and c_{n+2} < c_n for every n in [2, n_max] with
// margin 1e-12.
Lemma4Report verify_lemma4(std::size_t n_max);

struct SandwichOptions {
  std::size_t trials = 500;
  EstimatorConfig estimator;  // B, delta, sampling and lift modes
  // Regularity constants of the pair under test; proj_align / grad_norm / n /
  // B / delta are filled in from measurements and the estimator config.
  SmoothnessProfile profile_template;
  // Measure L_S and beta_S from ground truth around the base points instead
  // of trusting the template, inflated by constants_safety so a sampled
  // underestimate cannot fake a pass.
  bool measure_S_constants = false;
  double constants_safety = 1.5;
  double omega_override = -1.0;  // >= 0 replaces the profile-derived omega
};

struct SandwichReport {
  std::size_t trials = 0;
  double mean_cos = 0.0;
  double stderr_cos = 0.0;  // Monte Carlo standard error of the mean
  double mean_proj_align = 0.0;
  double mean_grad_norm = 0.0;
  std::vector<double> proj_align_per_trial;
  SmoothnessProfile profile;  // aggregate profile the bounds were computed from
  double omega = 0.0;
  CosineBounds bounds;
  bool skipped = false;      // bound assumption omega <= proj_align failed
  std::string skip_reason;
  bool pass = false;  // mean_cos within [lower - 3 stderr, upper + 3 stderr]
};

// Monte Carlo check of the expected-cosine sandwich: per trial, draw a base
// point, build the projection there, run one estimate, and record the cosine
// against the true gradient plus the measured alignment norms. The aggregate
// mean is compared against theorem1_bounds of the averaged profile.
SandwichReport verify_theorem1_sandwich(
    const GroundTruth& truth, DifferenceOracle& oracle,
    const std::function<std::unique_ptr<Projection>(const Vec&)>& projection_at,
    const std::function<Vec(Rng&)>& base_point, const SandwichOptions& opt, Rng& rng);

struct QueryComplexityFit {
  std::vector<std::size_t> B_list;
  std::vector<double> mean_cos;
  std::vector<double> stderr_cos;
  double slope = 0.0;      // a in mean_cos(B) ~ a * sqrt(B), fit through origin
  double r_squared = 0.0;  // 1 - SS_res / SS_tot about the mean
};

// Sweeps B, estimating the mean cosine at each size, and fits a * sqrt(B)
// through the origin by least squares.
QueryComplexityFit fit_query_complexity(
    const GroundTruth& truth, DifferenceOracle& oracle,
    const std::function<std::unique_ptr<Projection>(const Vec&)>& projection_at,
    const std::function<Vec(Rng&)>& base_point, const EstimatorConfig& estimator_template,
    const std::vector<std::size_t>& B_list, std::size_t trials, Rng& rng);

}  // namespace attacklab

#endif
