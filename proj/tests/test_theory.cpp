#include <doctest.h>

#include <cmath>
#include <vector>

#include "core/errors.hpp"
#include "core/rng.hpp"
#include "core/sampling.hpp"
#include "core/theory.hpp"

using namespace attacklab;

namespace {
SmoothnessProfile profile(double L_f, double l_f, double beta_f, double L_S, double beta_S,
                          double delta, std::size_t n, std::size_t B, double align,
                          double grad_norm) {
  SmoothnessProfile p;
  p.L_f = L_f;
  p.l_f = l_f;
  p.beta_f = beta_f;
  p.L_S = L_S;
  p.beta_S = beta_S;
  p.delta = delta;
  p.n = n;
  p.B = B;
  p.proj_align = align;
  p.grad_norm = grad_norm;
  return p;
}
}  // namespace

TEST_CASE("compute_cn known values and limits") {
  CHECK(std::abs(compute_cn(2) - 0.90031631615710606955) <= 1e-12);  // 2 sqrt(2)/pi
  CHECK(std::abs(compute_cn(3) - 0.86602540378443864676) <= 1e-12);  // sqrt(3)/2
  const double c1e4 = compute_cn(10000);
  CHECK(c1e4 > 2.0 / 3.14159265358979323846);
  CHECK(c1e4 < 1.0);
  CHECK_THROWS_AS(compute_cn(1), Error);
}

TEST_CASE("pa_pdf values, symmetry, endpoint handling") {
  for (double x : {-0.9, -0.25, 0.0, 0.4, 0.99})
    CHECK(pa_pdf(3, x) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(pa_pdf(5, 1.0) == 0.0);
  CHECK(pa_pdf(5, -1.0) == 0.0);
  CHECK(pa_pdf(2, 0.0) == doctest::Approx(1.0 / 3.14159265358979323846).epsilon(1e-12));
  CHECK(pa_pdf(2, 1.0) == 1e308);  // capped endpoint divergence
  for (double x : {0.1, 0.5, 0.77})
    for (std::size_t n : {2u, 4u, 9u}) CHECK(pa_pdf(n, x) == pa_pdf(n, -x));
  CHECK_THROWS_AS(pa_pdf(4, 1.5), Error);
}

TEST_CASE("pa_pdf integrates to one") {
  for (std::size_t n : {2u, 3u, 4u, 8u, 16u, 64u}) {
    // Integrate the CDF endpoints rather than the (possibly singular) PDF.
    CHECK(pa_cdf(n, 1.0) == 1.0);
    CHECK(pa_cdf(n, -1.0) == 0.0);
    // Riemann check on the interior for n >= 3 where the PDF is bounded.
    if (n >= 3) {
      double s = 0.0;
      const int steps = 20001;
      const double h = 1.998 / (steps - 1);
      for (int i = 0; i < steps; ++i) {
        const double x = -0.999 + i * h;
        const double w = (i == 0 || i == steps - 1) ? 0.5 : 1.0;
        s += w * pa_pdf(n, x) * h;
      }
      const double expected = pa_cdf(n, 0.999) - pa_cdf(n, -0.999);
      CHECK(s == doctest::Approx(expected).epsilon(1e-6));
    }
  }
}

TEST_CASE("pa_cdf analytic cases") {
  CHECK(pa_cdf(3, 0.5) == doctest::Approx(0.75).epsilon(1e-9));
  for (std::size_t n : {2u, 3u, 8u, 64u}) CHECK(pa_cdf(n, 0.0) == 0.5);
  // n=2 is the arcsine-type law: CDF = 1/2 + asin(x)/pi.
  for (double x : {-0.95, -0.5, 0.3, 0.9}) {
    const double expect = 0.5 + std::asin(x) / 3.14159265358979323846;
    CHECK(pa_cdf(2, x) == doctest::Approx(expect).epsilon(1e-9));
  }
  // n=5: CDF = 1/2 + (3x - x^3)/4.
  for (double x : {-0.8, -0.2, 0.4, 0.95}) {
    const double expect = 0.5 + (3.0 * x - x * x * x) / 4.0;
    CHECK(std::abs(pa_cdf(5, x) - expect) < 1e-9);
  }
}

TEST_CASE("compute_omega formula") {
  CHECK(compute_omega(profile(1, 1, 0, 2, 0, 0.1, 4, 4, 1, 1)) == 0.0);
  // beta_f = 0 collapses to the linear-projection form.
  const double w = compute_omega(profile(2, 1, 0, 3, 0.7, 0.05, 4, 4, 1, 1));
  CHECK(w == doctest::Approx(0.5 * 0.05 * 0.7 * 4.0).epsilon(1e-14));
  // Hand-evaluated general case.
  CHECK(compute_omega(profile(1, 1, 1, 2, 2, 0.1, 4, 4, 1, 1)) ==
        doctest::Approx(0.21025).epsilon(1e-14));
}

TEST_CASE("compute_omega_thm2 formula and ordering") {
  const auto p0 = profile(1, 1, 0, 2, 2, 0.1, 4, 4, 1, 1);
  CHECK(compute_omega_thm2(p0) == doctest::Approx(compute_omega(p0)).epsilon(1e-14));
  CHECK(compute_omega_thm2(profile(1, 1, 1, 2, 2, 0.1, 4, 4, 1, 1)) ==
        doctest::Approx(0.096).epsilon(1e-14));

  Rng rng(4242);
  for (int i = 0; i < 1000; ++i) {
    const double L_f = 0.1 + 3.0 * rng.next_unit();
    const double beta_f = 0.01 + rng.next_unit();
    const double beta_S = 0.01 + rng.next_unit();
    const double delta = 0.001 + 0.3 * rng.next_unit();
    const double L_S = 0.1 + rng.next_unit();
    // Keep the alignment consistent with the Lipschitz ceiling |J^T grad| <= L_f |grad|.
    auto p = profile(L_f, L_f / 2.0, beta_f, L_S, beta_S, delta, 8, 8, 0.5 * L_f, 1);
    const double curved = compute_omega_thm2(p);
    p.beta_f = 0.0;
    const double linear_case = compute_omega(p);
    CHECK(curved < linear_case);
  }
}

TEST_CASE("theorem1_bounds closed-form cases") {
  SUBCASE("omega=0 at maximal alignment collapses to c_n") {
    const auto b = theorem1_bounds(profile(1, 1, 0, 1, 0, 0.1, 16, 16, 1, 1), 0.0);
    const double cn = compute_cn(16);
    CHECK(b.lower == doctest::Approx(cn).epsilon(1e-12));
    CHECK(b.upper == doctest::Approx(cn).epsilon(1e-12));
    CHECK(b.relaxed_lower == doctest::Approx(cn).epsilon(1e-12));
  }
  SUBCASE("omega equal to alignment flips the inner term to -1") {
    const auto p = profile(1, 1, 0, 1, 0, 0.1, 16, 8, 0.8, 1.0);
    const auto b = theorem1_bounds(p, 0.8);
    const double scale = std::sqrt(8.0 / 16.0) * compute_cn(16);
    CHECK(b.lower == doctest::Approx(-0.8 * scale).epsilon(1e-12));
  }
  SUBCASE("hand-evaluated n=16 case with omega ratio 0.1") {
    const auto b = theorem1_bounds(profile(1, 1, 0, 1, 0, 0.1, 16, 16, 1, 1), 0.1);
    const double expect = (2.0 * std::pow(0.99, 7.5) - 1.0) * compute_cn(16);
    CHECK(b.lower == doctest::Approx(expect).epsilon(1e-12));
    CHECK(b.relaxed_lower <= b.lower);
  }
  SUBCASE("assumption violation raises a precondition error") {
    CHECK_THROWS_AS(theorem1_bounds(profile(1, 1, 0, 1, 0, 0.1, 16, 16, 0.5, 1), 0.6), Error);
  }
}

TEST_CASE("theorem1_bounds monotonicity grids") {
  const double aligns[] = {0.4, 0.7, 1.0};
  for (double a : aligns) {
    double prev_lower = 2.0;
    for (double w : {0.0, 0.1, 0.2, 0.3, 0.39}) {
      const auto b = theorem1_bounds(profile(1, 0.5, 0, 1, 0, 0.1, 32, 16, a, 1.0), w);
      CHECK(b.lower <= prev_lower + 1e-15);
      CHECK(b.lower <= b.upper);
      CHECK(b.relaxed_lower <= b.lower + 1e-15);
      prev_lower = b.lower;
    }
  }
  // Growth in B only helps while the bracketed term stays positive, so probe
  // that regime (small omega relative to the alignment).
  double prev = -2.0;
  for (std::size_t B : {4u, 8u, 16u, 32u}) {
    const auto b = theorem1_bounds(profile(1, 1, 0, 1, 0, 0.1, 32, B, 0.9, 1.0), 0.05);
    CHECK(b.lower >= prev - 1e-15);
    prev = b.lower;
  }
}

TEST_CASE("verify_lemma4 full range") {
  const auto r = verify_lemma4(200);
  CHECK(r.pass);
  CHECK(r.min_margin_above > 1e-12);
  CHECK(r.min_margin_below > 1e-12);
  CHECK(r.min_margin_mono > 1e-12);
  CHECK(r.c2_error <= 1e-12);
}

TEST_CASE("verify_lemma1 across dimensions") {
  for (std::size_t n : {2u, 3u, 64u}) {
    Rng rng(1000 + n);
    const auto r = verify_lemma1(n, 20000, rng);
    CHECK(r.pass);
  }
}

TEST_CASE("sandwich check collapses to a point for a linear pair") {
  // Linear victim + orthonormal projection: beta_f = beta_S = 0 so omega = 0,
  // and with l_f = L_f = 1 the two bounds coincide at
  // (|W^T w| / |w|) sqrt(B/n) c_n.
  const std::size_t m = 16, n = 8;
  Rng setup(404);
  Vec w = sample_unit_sphere(m, setup);
  w = scale(w, 1.7);
  Victim v = make_linear_victim(w, Vec(m));
  Rng frame_rng(77);
  const Mat W = sample_orthonormal_frame(m, n, frame_rng);

  SandwichOptions opt;
  opt.trials = 500;
  opt.estimator.B = 4;
  opt.estimator.delta = 1e-3;
  opt.profile_template.L_f = 1.0;
  opt.profile_template.l_f = 1.0;
  opt.profile_template.beta_f = 0.0;
  opt.profile_template.L_S = norm(w);
  opt.profile_template.beta_S = 0.0;

  Rng rng(2025);
  const Vec base(m);  // S(0) = 0: exactly on the boundary
  SandwichReport rep = verify_theorem1_sandwich(
      *v.truth, *v.oracle, [&](const Vec& x_b) { return orthonormal_projection(W, x_b); },
      [&](Rng&) { return base; }, opt, rng);

  CHECK_FALSE(rep.skipped);
  CHECK(rep.omega == 0.0);
  CHECK(rep.bounds.lower == rep.bounds.upper);
  const double a = norm(matvec_t(W, w));
  const double expected = a / norm(w) * std::sqrt(4.0 / 8.0) * compute_cn(n);
  CHECK(rep.bounds.lower == doctest::Approx(expected).epsilon(1e-12));
  CHECK(rep.mean_proj_align == doctest::Approx(a).epsilon(1e-12));
  CHECK(rep.stderr_cos < 0.05);
  CHECK(rep.pass);
  CHECK(std::abs(rep.mean_cos - expected) <= 3.0 * rep.stderr_cos);
  CHECK(rep.proj_align_per_trial.size() == 500);
}

TEST_CASE("sandwich holds for a mildly curved victim") {
  const std::size_t m = 8;
  Rng setup(405);
  Vec w = sample_unit_sphere(m, setup);
  w = scale(w, 1.5);
  Mat H = Mat::identity(m);
  for (std::size_t i = 0; i < m; ++i) H(i, i) = (i % 2 == 0 ? -0.2 : 0.1);
  Victim v = make_quadratic_victim(w, Vec(m), H);

  SandwichOptions opt;
  opt.trials = 600;
  opt.estimator.B = 4;
  opt.estimator.delta = 0.05;
  opt.profile_template.L_f = 1.0;
  opt.profile_template.l_f = 1.0;
  opt.profile_template.beta_f = 0.0;
  opt.profile_template.L_S = norm(w) + 1.0;
  opt.profile_template.beta_S = 0.2;

  Rng rng(2026);
  const Vec base(m);
  SandwichReport rep = verify_theorem1_sandwich(
      *v.truth, *v.oracle, [&](const Vec& x_b) { return identity_projection(x_b); },
      [&](Rng&) { return base; }, opt, rng);

  CHECK_FALSE(rep.skipped);
  CHECK(rep.omega == doctest::Approx(0.5 * 0.05 * 0.2).epsilon(1e-12));
  CHECK(rep.bounds.lower < rep.bounds.upper);
  CHECK(rep.pass);
}

TEST_CASE("sandwich is skipped when omega exceeds the alignment") {
  const std::size_t m = 4;
  Vec w = Vec::from({1.0, 0.5, -0.25, 0.0});
  Mat H = Mat::identity(m);
  for (std::size_t i = 0; i < m; ++i) H(i, i) = -0.5;
  Victim v = make_quadratic_victim(w, Vec(m), H);

  SandwichOptions opt;
  opt.trials = 500;
  opt.estimator.B = 2;
  opt.estimator.delta = 50.0;  // omega = 0.5 * 50 * 0.5 = 12.5 >> |w|
  opt.profile_template.beta_S = 0.5;
  opt.profile_template.L_S = 30.0;

  Rng rng(2027);
  const Vec base(m);
  SandwichReport rep = verify_theorem1_sandwich(
      *v.truth, *v.oracle, [&](const Vec& x_b) { return identity_projection(x_b); },
      [&](Rng&) { return base; }, opt, rng);
  CHECK(rep.skipped);
  CHECK(rep.skip_reason.find("assumption_violated") != std::string::npos);
  CHECK_FALSE(rep.pass);
}

TEST_CASE("sandwich can measure the victim's constants with a safety factor") {
  const std::size_t m = 6;
  Vec w = Vec::from({1.0, -0.5, 0.25, 0.0, 0.3, -0.1});
  Mat H = Mat::identity(m);
  for (std::size_t i = 0; i < m; ++i) H(i, i) = (i == 0 ? -0.3 : 0.05);
  Victim v = make_quadratic_victim(w, Vec(m), H);

  SandwichOptions opt;
  opt.trials = 500;
  opt.estimator.B = 3;
  opt.estimator.delta = 0.02;
  opt.measure_S_constants = true;

  Rng rng(2028);
  const Vec base(m);
  SandwichReport rep = verify_theorem1_sandwich(
      *v.truth, *v.oracle, [&](const Vec& x_b) { return identity_projection(x_b); },
      [&](Rng&) { return base; }, opt, rng);
  CHECK_FALSE(rep.skipped);
  // The quadratic victim knows beta_S exactly (top curvature 0.3), so the
  // report carries 1.5x that; L_S is a sampled sup of |grad| near the base.
  CHECK(rep.profile.beta_S == doctest::Approx(1.5 * 0.3).epsilon(1e-9));
  CHECK(rep.profile.L_S >= norm(w) * 0.99);
  CHECK(rep.pass);
}

TEST_CASE("sandwich validates its inputs") {
  Victim v = make_linear_victim(Vec::from({1.0, 0.0}), Vec(2));
  SandwichOptions opt;
  opt.trials = 100;  // too few
  opt.estimator.B = 2;
  opt.estimator.delta = 1e-3;
  Rng rng(1);
  CHECK_THROWS_AS(verify_theorem1_sandwich(
                      *v.truth, *v.oracle,
                      [](const Vec& x_b) { return identity_projection(x_b); },
                      [](Rng&) { return Vec(2); }, opt, rng),
                  Error);
}

TEST_CASE("query complexity fit recovers the sqrt(B) law") {
  const std::size_t m = 128, n = 64;
  Rng setup(406);
  Vec w = sample_unit_sphere(m, setup);
  Victim v = make_linear_victim(w, Vec(m));
  Rng frame_rng(88);
  const Mat W = sample_orthonormal_frame(m, n, frame_rng);

  EstimatorConfig est;
  est.delta = 1e-3;

  const std::vector<std::size_t> Bs = {4, 8, 16, 32, 64};
  Rng rng(2029);
  const Vec base(m);
  QueryComplexityFit fit = fit_query_complexity(
      *v.truth, *v.oracle, [&](const Vec& x_b) { return orthonormal_projection(W, x_b); },
      [&](Rng&) { return base; }, est, Bs, 200, rng);

  REQUIRE(fit.mean_cos.size() == 5);
  CHECK(fit.r_squared > 0.95);

  const double ratio = norm(matvec_t(W, w)) / norm(w);
  const double predicted_slope = ratio * compute_cn(n) / std::sqrt(static_cast<double>(n));
  CHECK(fit.slope == doctest::Approx(predicted_slope).epsilon(0.1));

  // The B = n point sits near c_n times the alignment ratio.
  CHECK(std::abs(fit.mean_cos.back() - ratio * compute_cn(n)) <=
        3.0 * fit.stderr_cos.back() + 0.02);

  // Doubling B scales the mean cosine by sqrt(2) up to Monte Carlo noise.
  for (std::size_t i = 0; i + 1 < Bs.size(); ++i) {
    CHECK(std::abs(fit.mean_cos[i + 1] / fit.mean_cos[i] - std::sqrt(2.0)) < 0.12);
  }

  // The reported slope is a local least-squares optimum.
  auto ss_res = [&](double a) {
    double s = 0.0;
    for (std::size_t i = 0; i < Bs.size(); ++i) {
      const double r = fit.mean_cos[i] - a * std::sqrt(static_cast<double>(Bs[i]));
      s += r * r;
    }
    return s;
  };
  CHECK(ss_res(fit.slope) <= ss_res(fit.slope * (1.0 + 1e-6)));
  CHECK(ss_res(fit.slope) <= ss_res(fit.slope * (1.0 - 1e-6)));

  CHECK_THROWS_AS(fit_query_complexity(
                      *v.truth, *v.oracle,
                      [&](const Vec& x_b) { return orthonormal_projection(W, x_b); },
                      [&](Rng&) { return base; }, est, {}, 200, rng),
                  Error);
  CHECK_THROWS_AS(fit_query_complexity(
                      *v.truth, *v.oracle,
                      [&](const Vec& x_b) { return orthonormal_projection(W, x_b); },
                      [&](Rng&) { return base; }, est, Bs, 50, rng),
                  Error);
}
