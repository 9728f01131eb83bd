#include "theory.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "errors.hpp"
#include "sampling.hpp"
#include "special.hpp"

namespace attacklab {
namespace {

constexpr double kPdfCap = 1e308;

void validate_profile(const SmoothnessProfile& p) {
  if (p.l_f > p.L_f) fail(ErrorKind::invalid_argument, "profile: l_f must not exceed L_f");
  if (!(p.delta > 0.0)) fail(ErrorKind::invalid_argument, "profile: delta must be positive");
  if (p.B > p.n || p.B == 0)
    fail(ErrorKind::invalid_argument, "profile: need 1 <= B <= n");
  if (p.L_f < 0.0 || p.l_f < 0.0 || p.beta_f < 0.0 || p.L_S < 0.0 || p.beta_S < 0.0)
    fail(ErrorKind::invalid_argument, "profile: constants must be nonnegative");
  if (p.proj_align > p.L_f * p.grad_norm * (1.0 + 1e-9))
    fail(ErrorKind::invalid_argument, "profile: projected alignment exceeds L_f * grad_norm");
}

// Adaptive Simpson on a smooth integrand.
template <typename F>
double simpson_rec(const F& f, double a, double b, double fa, double fm, double fb, double whole,
                   double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

template <typename F>
double adaptive_simpson(const F& f, double a, double b, double tol) {
  if (a == b) return 0.0;
  const double m = 0.5 * (a + b);
  const double fa = f(a), fm = f(m), fb = f(b);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_rec(f, a, b, fa, fm, fb, whole, tol, 48);
}

// Mass of p_a between 0 and x >= 0, via the theta substitution:
// integral of cos(theta)^(n-2) / Beta((n-1)/2, 1/2) over [0, asin(x)].
double pa_half_mass(std::size_t n, double x) {
  const double inv_beta =
      std::exp(-log_beta(0.5 * (static_cast<double>(n) - 1.0), 0.5));
  const double power = static_cast<double>(n) - 2.0;
  const auto integrand = [&](double theta) {
    return inv_beta * std::pow(std::cos(theta), power);
  };
  return adaptive_simpson(integrand, 0.0, std::asin(std::min(x, 1.0)), 1e-11);
}

}  // namespace

double compute_cn(std::size_t n) {
  if (n < 2) fail(ErrorKind::invalid_argument, "compute_cn: need n >= 2");
  const double nn = static_cast<double>(n);
  return 2.0 * std::sqrt(nn) * std::exp(-log_beta(0.5 * (nn - 1.0), 0.5)) / (nn - 1.0);
}

double pa_pdf(std::size_t n, double x) {
  if (n < 2) fail(ErrorKind::invalid_argument, "pa_pdf: need n >= 2");
  if (!(x >= -1.0 && x <= 1.0))
    fail(ErrorKind::invalid_argument, "pa_pdf: argument outside [-1, 1]: " + std::to_string(x));
  const double nn = static_cast<double>(n);
  const double inv_beta = std::exp(-log_beta(0.5 * (nn - 1.0), 0.5));
  const double base = 1.0 - x * x;
  if (base == 0.0 && n == 2) return kPdfCap;  // integrable endpoint divergence
  const double v = std::pow(base, 0.5 * (nn - 3.0)) * inv_beta;
  return std::isfinite(v) ? v : kPdfCap;
}

double pa_cdf(std::size_t n, double x) {
  if (n < 2) fail(ErrorKind::invalid_argument, "pa_cdf: need n >= 2");
  if (!(x >= -1.0 && x <= 1.0))
    fail(ErrorKind::invalid_argument, "pa_cdf: argument outside [-1, 1]: " + std::to_string(x));
  if (x == 0.0) return 0.5;
  if (x == 1.0) return 1.0;
  if (x == -1.0) return 0.0;
  const double half = pa_half_mass(n, std::abs(x));
  const double c = x > 0.0 ? 0.5 + half : 0.5 - half;
  return std::clamp(c, 0.0, 1.0);
}

double compute_omega(const SmoothnessProfile& p) {
  validate_profile(p);
  const double d = p.delta;
  return d * (0.5 * p.beta_f * p.L_S + 0.5 * p.beta_S * p.L_f * p.L_f +
              0.5 * d * p.beta_f * p.beta_S * p.L_f +
              0.125 * d * d * p.beta_f * p.beta_f * p.beta_S);
}

double compute_omega_thm2(const SmoothnessProfile& p) {
  validate_profile(p);
  return 0.5 * p.delta * p.beta_S * p.L_f * p.L_f -
         0.2 * p.beta_f * p.beta_S * p.delta * p.delta * p.L_f;
}

CosineBounds theorem1_bounds(const SmoothnessProfile& p, double omega) {
  validate_profile(p);
  if (omega < 0.0) fail(ErrorKind::invalid_argument, "theorem1_bounds: omega must be nonnegative");
  if (!(p.grad_norm > 0.0))
    fail(ErrorKind::invalid_argument, "theorem1_bounds: zero gradient norm");
  if (!(p.l_f > 0.0))
    fail(ErrorKind::invalid_argument, "theorem1_bounds: upper bound needs l_f > 0");
  if (omega > p.proj_align)
    fail(ErrorKind::precondition,
         "assumption_violated: omega " + std::to_string(omega) +
             " exceeds projection alignment " + std::to_string(p.proj_align));
  const double nn = static_cast<double>(p.n);
  const double scale = std::sqrt(static_cast<double>(p.B) / nn) * compute_cn(p.n);
  const double ratio_sq =
      omega == 0.0 ? 0.0 : (omega / p.proj_align) * (omega / p.proj_align);
  const double align_lower = p.proj_align / (p.L_f * p.grad_norm);
  CosineBounds b;
  b.lower = (2.0 * std::pow(1.0 - ratio_sq, 0.5 * (nn - 1.0)) - 1.0) * align_lower * scale;
  b.upper = p.proj_align / (p.l_f * p.grad_norm) * scale;
  b.relaxed_lower = (1.0 - (nn - 1.0) * ratio_sq) * align_lower * scale;
  return b;
}

Lemma1Report verify_lemma1(std::size_t n, std::size_t samples, Rng& rng) {
  if (n < 2) fail(ErrorKind::invalid_argument, "verify_lemma1: need n >= 2");
  if (samples < 10000)
    fail(ErrorKind::invalid_argument, "verify_lemma1: need at least 10^4 samples");
  std::vector<double> xs(samples);
  for (std::size_t i = 0; i < samples; ++i) xs[i] = sample_unit_sphere(n, rng)[0];
  std::sort(xs.begin(), xs.end());
  const double count = static_cast<double>(samples);
  double d = 0.0;
  for (std::size_t i = 0; i < samples; ++i) {
    const double f = pa_cdf(n, xs[i]);
    d = std::max(d, f - static_cast<double>(i) / count);
    d = std::max(d, static_cast<double>(i + 1) / count - f);
  }
  Lemma1Report r;
  r.n = n;
  r.samples = samples;
  r.ks = d;
  r.critical = 1.63 / std::sqrt(count);
  r.pass = d < r.critical;
  return r;
}

Lemma4Report verify_lemma4(std::size_t n_max) {
  if (n_max < 4) fail(ErrorKind::invalid_argument, "verify_lemma4: need n_max >= 4");
  constexpr double kTwoOverPi = 0.63661977236758134307553505349006;
  constexpr double kTwoSqrt2OverPi = 0.90031631615710606955539110459479;
  Lemma4Report r;
  r.n_max = n_max;
  std::vector<double> cn(n_max + 1, 0.0);
  for (std::size_t n = 2; n <= n_max; ++n) cn[n] = compute_cn(n);
  r.min_margin_above = 2.0;
  r.min_margin_below = 2.0;
  r.min_margin_mono = 2.0;
  for (std::size_t n = 2; n <= n_max; ++n) {
    r.min_margin_above = std::min(r.min_margin_above, cn[n] - kTwoOverPi);
    r.min_margin_below = std::min(r.min_margin_below, 1.0 - cn[n]);
    if (n + 2 <= n_max) r.min_margin_mono = std::min(r.min_margin_mono, cn[n] - cn[n + 2]);
  }
  r.c2_error = std::abs(cn[2] - kTwoSqrt2OverPi);
  r.pass = r.min_margin_above > 1e-12 && r.min_margin_below > 1e-12 &&
           r.min_margin_mono > 1e-12 && r.c2_error <= 1e-12;
  return r;
}

namespace {

struct TrialSeries {
  double mean = 0.0;
  double stderr_mean = 0.0;
};

TrialSeries summarize(const std::vector<double>& xs) {
  TrialSeries s;
  const double count = static_cast<double>(xs.size());
  for (double x : xs) s.mean += x;
  s.mean /= count;
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - s.mean) * (x - s.mean);
    s.stderr_mean = std::sqrt(ss / (count - 1.0) / count);
  }
  return s;
}

}  // namespace

SandwichReport verify_theorem1_sandwich(
    const GroundTruth& truth, DifferenceOracle& oracle,
    const std::function<std::unique_ptr<Projection>(const Vec&)>& projection_at,
    const std::function<Vec(Rng&)>& base_point, const SandwichOptions& opt, Rng& rng) {
  if (opt.trials < 500)
    fail(ErrorKind::invalid_argument, "sandwich: need at least 500 trials");
  if (!projection_at || !base_point)
    fail(ErrorKind::invalid_argument, "sandwich: projection and base point samplers are required");

  SandwichReport rep;
  rep.trials = opt.trials;
  rep.proj_align_per_trial.reserve(opt.trials);

  std::vector<double> cosines;
  cosines.reserve(opt.trials);
  double sum_grad = 0.0;
  double max_L_S = 0.0, max_beta_S = 0.0;
  std::size_t latent_n = 0;

  for (std::size_t trial = 0; trial < opt.trials; ++trial) {
    Rng trial_rng = rng.child(trial);
    const Vec x_b = base_point(trial_rng);
    std::unique_ptr<Projection> proj = projection_at(x_b);
    latent_n = proj->n();

    GradientEstimate e = estimate_gradient(*proj, oracle, opt.estimator, trial_rng);
    cosines.push_back(cosine_to_truth(e, truth, x_b));

    const Vec grad = truth.gradient(x_b);
    rep.proj_align_per_trial.push_back(norm(matvec_t(proj->jacobian_at_base(), grad)));
    sum_grad += norm(grad);

    if (opt.measure_S_constants) {
      // Constants must cover the probe ball: ambient radius L_f * delta.
      const double r = opt.profile_template.L_f * opt.estimator.delta;
      Rng c_rng = trial_rng.child(0x5eed);
      const LocalConstants lc = truth.local_constants(x_b, r, c_rng);
      max_L_S = std::max(max_L_S, lc.L_S);
      max_beta_S = std::max(max_beta_S, lc.beta_S);
    }
  }

  const TrialSeries cos_stats = summarize(cosines);
  const TrialSeries align_stats = summarize(rep.proj_align_per_trial);
  rep.mean_cos = cos_stats.mean;
  rep.stderr_cos = cos_stats.stderr_mean;
  rep.mean_proj_align = align_stats.mean;
  rep.mean_grad_norm = sum_grad / static_cast<double>(opt.trials);

  rep.profile = opt.profile_template;
  rep.profile.n = latent_n;
  rep.profile.B = opt.estimator.B;
  rep.profile.delta = opt.estimator.delta;
  rep.profile.proj_align = rep.mean_proj_align;
  rep.profile.grad_norm = rep.mean_grad_norm;
  if (opt.measure_S_constants) {
    rep.profile.L_S = opt.constants_safety * max_L_S;
    rep.profile.beta_S = opt.constants_safety * max_beta_S;
  }

  rep.omega = opt.omega_override >= 0.0 ? opt.omega_override : compute_omega(rep.profile);
  try {
    rep.bounds = theorem1_bounds(rep.profile, rep.omega);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::precondition) throw;
    rep.skipped = true;
    rep.skip_reason = e.what();
    return rep;
  }
  rep.pass = rep.mean_cos >= rep.bounds.lower - 3.0 * rep.stderr_cos &&
             rep.mean_cos <= rep.bounds.upper + 3.0 * rep.stderr_cos;
  return rep;
}

QueryComplexityFit fit_query_complexity(
    const GroundTruth& truth, DifferenceOracle& oracle,
    const std::function<std::unique_ptr<Projection>(const Vec&)>& projection_at,
    const std::function<Vec(Rng&)>& base_point, const EstimatorConfig& estimator_template,
    const std::vector<std::size_t>& B_list, std::size_t trials, Rng& rng) {
  if (B_list.empty()) fail(ErrorKind::invalid_argument, "complexity fit: empty B list");
  if (trials < 200)
    fail(ErrorKind::invalid_argument, "complexity fit: need at least 200 trials per B");
  if (!projection_at || !base_point)
    fail(ErrorKind::invalid_argument, "complexity fit: projection and base point samplers required");

  QueryComplexityFit fit;
  fit.B_list = B_list;

  for (std::size_t bi = 0; bi < B_list.size(); ++bi) {
    EstimatorConfig cfg = estimator_template;
    cfg.B = B_list[bi];
    Rng b_rng = rng.child(bi);
    std::vector<double> cosines;
    cosines.reserve(trials);
    for (std::size_t trial = 0; trial < trials; ++trial) {
      Rng trial_rng = b_rng.child(trial);
      const Vec x_b = base_point(trial_rng);
      std::unique_ptr<Projection> proj = projection_at(x_b);
      GradientEstimate e = estimate_gradient(*proj, oracle, cfg, trial_rng);
      cosines.push_back(cosine_to_truth(e, truth, x_b));
    }
    const TrialSeries stats = summarize(cosines);
    fit.mean_cos.push_back(stats.mean);
    fit.stderr_cos.push_back(stats.stderr_mean);
  }

  // Least squares for s = a sqrt(B) through the origin: a = sum(s sqrt(B)) / sum(B).
  double num = 0.0, den = 0.0, s_mean = 0.0;
  for (std::size_t i = 0; i < B_list.size(); ++i) {
    const double sq = std::sqrt(static_cast<double>(B_list[i]));
    num += fit.mean_cos[i] * sq;
    den += static_cast<double>(B_list[i]);
    s_mean += fit.mean_cos[i];
  }
  fit.slope = num / den;
  s_mean /= static_cast<double>(B_list.size());
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t i = 0; i < B_list.size(); ++i) {
    const double pred = fit.slope * std::sqrt(static_cast<double>(B_list[i]));
    ss_res += (fit.mean_cos[i] - pred) * (fit.mean_cos[i] - pred);
    ss_tot += (fit.mean_cos[i] - s_mean) * (fit.mean_cos[i] - s_mean);
  }
  fit.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  return fit;
}

}  // namespace attacklab
