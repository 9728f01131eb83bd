// Acceptance gate: eleven numbered end-to-end checks over the whole lab,
// one printed PASS/FAIL line each.  Run everything (no arguments) or a single
// check with --only <k>.  Exit status is the number of failed checks.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdarg>
#include <cstring>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "core/attack.hpp"
#include "core/estimator.hpp"
#include "core/experiments.hpp"
#include "core/projections.hpp"
#include "core/rng.hpp"
#include "core/sampling.hpp"
#include "core/theory.hpp"
#include "core/vec.hpp"
#include "core/victim_spec.hpp"
#include "core/victims.hpp"
#include "core/wire.hpp"
#include "support/oracles.hpp"

namespace {

using namespace attacklab;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof(buf), f, ap);
  va_end(ap);
  return buf;
}

Vec rand_vec(Rng& rng, std::size_t n) {
  Vec v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = rng.next_gaussian();
  return v;
}

std::vector<Vec> frame_columns(std::size_t n, std::size_t b, Rng& rng) {
  const Mat f = sample_orthonormal_frame(n, b, rng);
  std::vector<Vec> cols;
  cols.reserve(b);
  for (std::size_t j = 0; j < b; ++j) cols.push_back(f.col(j));
  return cols;
}

double median(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  const std::size_t k = xs.size();
  return k % 2 ? xs[k / 2] : 0.5 * (xs[k / 2 - 1] + xs[k / 2]);
}

// One-sided sign-test tail: P[X >= wins] for X ~ Binomial(trials, 1/2).
double sign_test_p(std::size_t wins, std::size_t trials) {
  double p = 0.0;
  for (std::size_t k = wins; k <= trials; ++k) {
    const double log_c = std::lgamma(double(trials) + 1.0) - std::lgamma(double(k) + 1.0) -
                         std::lgamma(double(trials - k) + 1.0);
    p += std::exp(log_c - double(trials) * std::log(2.0));
  }
  return std::min(p, 1.0);
}

// ---------------------------------------------------------------- check 1 --
// Dimension constant: 2/pi < c_n < 1 and c_{n+2} < c_n on n in [2, 200] with
// margin 1e-12, c_2 = 2 sqrt(2)/pi to 1e-12, all inside one second.
Outcome check1() {
  const auto t0 = std::chrono::steady_clock::now();
  const Lemma4Report rep = verify_lemma4(200);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool in_time = secs < 1.0;
  const bool pass = rep.pass && rep.min_margin_above >= 1e-12 && rep.min_margin_below >= 1e-12 &&
                    rep.min_margin_mono >= 1e-12 && rep.c2_error <= 1e-12 && in_time;
  return {pass, fmt("margins above/below/mono %.2e/%.2e/%.2e, c2 err %.2e, %.3fs",
                    rep.min_margin_above, rep.min_margin_below, rep.min_margin_mono, rep.c2_error,
                    secs)};
}

// ---------------------------------------------------------------- check 2 --
// Sampled direction-cosine distribution matches pa_cdf: KS over 1e5 draws
// below the 1% critical value for n in {2, 3, 16, 64}, within 30 seconds.
Outcome check2() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(0xacc2);
  bool pass = true;
  std::string detail;
  for (const std::size_t n : {std::size_t{2}, std::size_t{3}, std::size_t{16}, std::size_t{64}}) {
    const Lemma1Report rep = verify_lemma1(n, 100000, rng);
    pass = pass && rep.pass;
    detail += fmt("n=%zu ks %.4f/%.4f%s ", n, rep.ks, rep.critical, rep.pass ? "" : "(FAIL)");
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  pass = pass && secs < 30.0;
  return {pass, detail + fmt("%.1fs", secs)};
}

// ---------------------------------------------------------------- check 3 --
// Raw-estimate norm law: 1000 seeded frame-mode estimates all have
// ||raw_low|| = 1/sqrt(B) to 1e-10 with no exact-tie probes.
Outcome check3() {
  const std::size_t m = 16, B = 8;
  Rng setup(0xacc3);
  const Vec w = rand_vec(setup, m);
  auto victim = make_linear_victim(w, Vec(m));
  auto p = identity_projection(Vec(m));
  const EstimatorConfig cfg{B, 0.05, SamplingMode::orthonormal_frame, LiftMode::precise};
  const double want = 1.0 / std::sqrt(double(B));
  double worst = 0.0;
  std::size_t ties = 0;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    Rng rng = Rng(0xacc3).child(seed);
    const GradientEstimate e = estimate_raw(*p, *victim.oracle, cfg, rng);
    worst = std::max(worst, std::abs(norm(e.raw_low) - want));
    ties += e.had_zero_tie ? 1 : 0;
  }
  return {worst <= 1e-10 && ties == 0, fmt("worst |norm - 1/sqrt(B)| %.2e, ties %zu", worst, ties)};
}

// ---------------------------------------------------------------- check 4 --
// Reduction to the two published special cases: with a shared direction
// stream, the identity-projection estimate equals the full-space sign
// estimator and the orthonormal-projection estimate equals the subspace
// estimator, bit for bit, over 100 seeds each.
Outcome check4() {
  std::size_t exact_identity = 0, exact_subspace = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    {  // full-space reduction
      Rng rng = Rng(0xacc4).child(seed);
      const std::size_t n = 12, B = 8;
      const double delta = 0.07;
      const Vec w = rand_vec(rng, n);
      auto victim = make_linear_victim(w, Vec(n));
      auto reference_victim = make_linear_victim(w, Vec(n));
      auto p = identity_projection(Vec(n));
      const auto dirs = frame_columns(n, B, rng);
      EstimatorConfig cfg{B, delta, SamplingMode::orthonormal_frame, LiftMode::precise};
      GradientEstimate e = estimate_raw_with_directions(*p, *victim.oracle, cfg, dirs);
      lift_estimate(*p, e, cfg);
      Vec acc(n);
      bool same = true;
      for (std::size_t i = 0; i < B; ++i) {
        const Vec probe = add(Vec(n), scale(dirs[i], delta));
        const int s = reference_victim.oracle->query_sign(probe);
        same = same && s == e.signs[i];
        axpy(acc, double(s), dirs[i]);
      }
      const Vec ref = scale(acc, 1.0 / double(B));
      for (std::size_t i = 0; i < n; ++i)
        same = same && e.raw_low[i] == ref[i] && e.lifted[i] == ref[i];
      exact_identity += same ? 1 : 0;
    }
    {  // subspace reduction
      Rng rng = Rng(0xacc4).child(1000 + seed);
      const std::size_t m = 24, n = 6, B = 6;
      const double delta = 0.05;
      const Vec w = rand_vec(rng, m);
      auto victim = make_linear_victim(w, Vec(m));
      auto reference_victim = make_linear_victim(w, Vec(m));
      const Mat W = sample_orthonormal_frame(m, n, rng);
      auto p = orthonormal_projection(W, Vec(m));
      const auto dirs = frame_columns(n, B, rng);
      EstimatorConfig cfg{B, delta, SamplingMode::orthonormal_frame, LiftMode::approximate};
      GradientEstimate e = estimate_raw_with_directions(*p, *victim.oracle, cfg, dirs);
      lift_estimate(*p, e, cfg);
      Vec acc(m);
      bool same = true;
      for (std::size_t i = 0; i < B; ++i) {
        const Vec probe = add(Vec(m), matvec(W, scale(dirs[i], delta)));
        const int s = reference_victim.oracle->query_sign(probe);
        same = same && s == e.signs[i];
        axpy(acc, double(s), matvec(W, dirs[i]));
      }
      const Vec ref = scale(acc, 1.0 / double(B));
      for (std::size_t i = 0; i < m; ++i) same = same && e.lifted[i] == ref[i];
      exact_subspace += same ? 1 : 0;
    }
  }
  return {exact_identity == 100 && exact_subspace == 100,
          fmt("bitwise equal: full-space %zu/100, subspace %zu/100", exact_identity,
              exact_subspace)};
}

// ---------------------------------------------------------------- check 5 --
// Expected-cosine sandwich, 2000 trials per case: (a) linear victim +
// orthonormal projection sits inside the bounds and within 0.02 of the
// collapsed value (align/grad) sqrt(B/n) c_n; (b) quadratic victims tuned to
// omega/alignment ratios 0.1 and 0.3 stay inside the bounds.  Under 5 min.
SandwichReport sandwich_run(const Victim& victim, const Mat& W, double delta, std::size_t B,
                            std::size_t trials, std::uint64_t seed) {
  SandwichOptions opt;
  opt.trials = trials;
  opt.estimator = {B, delta, SamplingMode::orthonormal_frame, LiftMode::precise};
  opt.measure_S_constants = true;
  auto projection_at = [&W](const Vec& xb) { return orthonormal_projection(W, xb); };
  auto base = boundary_point_sampler(*victim.oracle, 1.0, 1e-6);
  Rng rng(seed);
  return verify_theorem1_sandwich(*victim.truth, *victim.oracle, projection_at, base, opt, rng);
}

Outcome check5() {
  const auto t0 = std::chrono::steady_clock::now();
  std::string detail;
  bool pass = true;

  {  // (a) straight-line case: omega vanishes, bounds collapse
    const std::size_t m = 256, n = 64, B = 32;
    Rng setup(0xacc5);
    auto victim = make_linear_victim(rand_vec(setup, m), Vec(m));
    const Mat W = sample_orthonormal_frame(m, n, setup);
    const SandwichReport rep = sandwich_run(victim, W, 1e-3, B, 2000, 0x5a1);
    const double collapsed = rep.profile.proj_align / rep.profile.grad_norm *
                             std::sqrt(double(B) / double(n)) * compute_cn(n);
    const double gap = std::abs(rep.mean_cos - collapsed);
    const bool ok = rep.pass && !rep.skipped && gap <= 0.02;
    pass = pass && ok;
    detail += fmt("linear: cos %.4f in [%.4f, %.4f], |cos-collapsed| %.3f%s; ", rep.mean_cos,
                  rep.bounds.lower, rep.bounds.upper, gap, ok ? "" : " (FAIL)");
  }

  for (const double target : {0.1, 0.3}) {  // (b) curved cases
    const std::size_t m = 64, n = 16, B = 8;
    Rng setup(0xacc5b);
    const Vec w = rand_vec(setup, m);
    Mat H(m, m);
    for (std::size_t i = 0; i < m; ++i) {
      const double mag = 0.5 + 0.5 * setup.next_unit();
      H(i, i) = (setup.next_u64() & 1) ? mag : -mag;
    }
    auto victim = make_quadratic_victim(w, Vec(m), H);
    const Mat W = sample_orthonormal_frame(m, n, setup);

    // Pilot run to size delta: with a linear projection the indicator is
    // (beta_S delta L_f^2) / 2, so the target ratio fixes delta directly.
    const SandwichReport pilot = sandwich_run(victim, W, 0.02, B, 500, 0x5b0);
    const double delta_star =
        2.0 * target * pilot.profile.proj_align / pilot.profile.beta_S;
    const SandwichReport rep = sandwich_run(victim, W, delta_star, B, 2000, 0x5b1);
    const double ratio = rep.omega / rep.profile.proj_align;
    const bool ok =
        rep.pass && !rep.skipped && std::abs(ratio - target) <= 0.25 * target;
    pass = pass && ok;
    detail += fmt("ratio %.3f (target %.1f): cos %.4f in [%.4f, %.4f]%s; ", ratio, target,
                  rep.mean_cos, rep.bounds.lower, rep.bounds.upper, ok ? "" : " (FAIL)");
  }

  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  pass = pass && secs < 300.0;
  return {pass, detail + fmt("%.1fs", secs)};
}

// ---------------------------------------------------------------- check 6 --
// Mean cosine grows like sqrt(B): origin-constrained fit over
// B in {4, 8, 16, 32, 64} at n = 64 explains R^2 > 0.95.
Outcome check6() {
  const std::size_t m = 64;
  Rng setup(0xacc6);
  auto victim = make_linear_victim(rand_vec(setup, m), Vec(m));
  auto projection_at = [](const Vec& xb) { return identity_projection(xb); };
  auto base = boundary_point_sampler(*victim.oracle, 1.0, 1e-6);
  const EstimatorConfig tmpl{0, 1e-3, SamplingMode::orthonormal_frame, LiftMode::precise};
  Rng rng(0xacc6d);
  const QueryComplexityFit fit = fit_query_complexity(*victim.truth, *victim.oracle, projection_at,
                                                      base, tmpl, {4, 8, 16, 32, 64}, 400, rng);
  return {fit.r_squared > 0.95, fmt("R^2 %.4f, slope %.4f", fit.r_squared, fit.slope)};
}

// ---------------------------------------------------------------- check 7 --
// Indicator ordering and the curvature-bent construction: the sharp
// indicator is strictly below the general one on 1000 random positive
// profiles, and 100 random curved-construction instances honor their base
// value, base Jacobian, Lipschitz ceiling, and smoothness ceiling.
Outcome check7() {
  Rng rng(0xacc7);
  const auto log_u = [&rng] { return std::exp(std::log(1e-2) + rng.next_unit() * std::log(1e3)); };

  std::size_t ordered = 0;
  for (std::size_t i = 0; i < 1000; ++i) {
    SmoothnessProfile p;
    p.L_f = log_u();
    p.l_f = p.L_f * (0.1 + 0.9 * rng.next_unit());
    p.beta_f = log_u();
    p.L_S = log_u();
    p.beta_S = log_u();
    p.delta = log_u();
    p.n = 2 + rng.next_u64() % 63;
    p.B = 1 + rng.next_u64() % p.n;
    p.grad_norm = log_u();
    p.proj_align = p.L_f * p.grad_norm * rng.next_unit();
    ordered += compute_omega_thm2(p) < compute_omega(p) ? 1 : 0;
  }

  std::size_t honored = 0;
  double worst_lip = 0.0, worst_smooth = 0.0;
  for (std::size_t i = 0; i < 100; ++i) {
    const std::size_t n = 2 + rng.next_u64() % 4;
    const std::size_t m = n + 1 + rng.next_u64() % 6;
    const Mat J = sample_orthonormal_frame(m, n, rng);
    const Vec x_b = rand_vec(rng, m);
    const double alpha = 0.1 + 1.9 * rng.next_unit();
    auto p = constructed_nonlinear_b(J, x_b, alpha);
    const auto dc = p->declared_constants();

    bool ok = true;
    {  // base value and base Jacobian
      const Vec at0 = p->apply(Vec(n));
      for (std::size_t j = 0; j < m; ++j) ok = ok && at0[j] == x_b[j];
      const Mat fd = oracles::fd_jacobian([&](const Vec& u) { return p->direction(u); }, Vec(n),
                                          1e-6);
      for (std::size_t r = 0; r < m; ++r)
        for (std::size_t c = 0; c < n; ++c) ok = ok && std::abs(fd(r, c) - J(r, c)) <= 1e-5;
    }
    const double radius = std::min(0.5, 0.5 / alpha);
    for (std::size_t s = 0; s < 200; ++s) {  // Lipschitz ceiling on value gaps
      const Vec u = scale(sample_unit_sphere(n, rng), radius * rng.next_unit());
      const Vec v = scale(sample_unit_sphere(n, rng), radius * rng.next_unit());
      const double gap = distance(u, v);
      if (gap < 1e-9) continue;
      const double ratio = distance(p->apply(u), p->apply(v)) / (gap * dc.L_f);
      worst_lip = std::max(worst_lip, ratio);
      ok = ok && ratio <= 1.0 + 1e-9;
    }
    {  // smoothness ceiling on sampled Jacobian gaps
      const auto mc = measure_projection_constants(*p, radius, 100, rng);
      const double ratio = mc.beta_f / dc.beta_f;
      worst_smooth = std::max(worst_smooth, ratio);
      ok = ok && ratio <= 1.02;
    }
    honored += ok ? 1 : 0;
  }

  return {ordered == 1000 && honored == 100,
          fmt("indicator strictly ordered %zu/1000; construction checks %zu/100 "
              "(worst lip %.4f, smooth %.4f of ceiling)",
              ordered, honored, worst_lip, worst_smooth)};
}

// ---------------------------------------------------------------- check 8 --
// Attack on a 32-16-16-3 tanh net: every traced point stays adversarial and
// at least 18 of 20 pairs reach MSE < 1e-4 within 5000 queries.
Outcome check8() {
  Rng wr(0xacc8);
  const std::size_t m = 32;
  const auto layer = [&wr](std::size_t out, std::size_t in) {
    Mat w(out, in);
    for (std::size_t r = 0; r < out; ++r)
      for (std::size_t c = 0; c < in; ++c) w(r, c) = wr.next_gaussian() / std::sqrt(double(in));
    return w;
  };
  const auto bias = [&wr](std::size_t out) {
    Vec b(out);
    for (std::size_t i = 0; i < out; ++i) b[i] = 0.1 * wr.next_gaussian();
    return b;
  };
  const std::vector<Mat> weights = {layer(16, m), layer(16, 16), layer(3, 16)};
  const std::vector<Vec> biases = {bias(16), bias(16), bias(3)};
  auto victim = make_mlp_victim(weights, biases, 0, 1);
  auto checker = make_mlp_victim(weights, biases, 0, 1);  // fresh counter for re-validation

  // Final MSE is floored by the target's distance to the boundary, so build
  // targets a controlled 0.02 onto the benign side (the reachable-target
  // regime the attack is meant for) and attack them from independent
  // adversarial sources.  None of these construction queries are budgeted.
  const auto raw = sample_attack_pairs(*victim.oracle, {40, 1.0, 0xacc8, 100000});
  std::vector<std::pair<Vec, Vec>> pairs;
  for (std::size_t i = 0; i < 20; ++i) {
    const Vec& adv = raw[2 * i].first;
    const Vec& ben = raw[2 * i].second;
    const Vec& src = raw[2 * i + 1].first;
    const BisectResult edge =
        binary_search_to_boundary(*victim.oracle, adv, ben, 1e-5, false);
    const Vec out = normalized(sub(ben, edge.point));
    double eps = 0.15;
    Vec tgt = add(edge.point, scale(out, eps));
    while (victim.oracle->query_sign(tgt) != -1 && eps < 0.5) {
      eps *= 2.0;
      tgt = add(edge.point, scale(out, eps));
    }
    pairs.emplace_back(src, tgt);
  }
  AttackConfig cfg;
  cfg.budget = 5000;
  cfg.theta = 1e-3;
  cfg.initial_B = 10;
  cfg.success_mse = 1e-4;
  const ProjectionFactory factory = [](const Vec& xb) { return identity_projection(xb); };

  std::size_t converged = 0, points = 0, invalid = 0, easy_inits = 0;
  double worst_mse = 0.0;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    cfg.seed = Rng(0xacc8).child(500 + i).next_u64();
    const AttackResult res = run_attack(*victim.oracle, factory, pairs[i].first, pairs[i].second,
                                        cfg);
    for (const Vec& x : res.traced_points) {
      ++points;
      invalid += checker.oracle->query_sign(x) == +1 ? 0 : 1;
    }
    converged += res.final_mse < 1e-4 && res.queries_spent <= 5000 ? 1 : 0;
    worst_mse = std::max(worst_mse, res.final_mse);
    easy_inits += !res.trace.rows.empty() && res.trace.rows.front().mse < 1e-4 ? 1 : 0;
  }
  const bool pass = invalid == 0 && converged >= 18;
  return {pass, fmt("traced points valid %zu/%zu, converged %zu/20 (%zu already at init), "
                    "worst final MSE %.2e",
                    points - invalid, points, converged, easy_inits, worst_mse)};
}

// ---------------------------------------------------------------- check 9 --
// Subspace benefit at m = 1024: with the victim gradient concentrated in a
// 64-dim subspace, projecting onto that subspace beats the full-space attack
// on median final MSE with a sign-test p below 0.05 over 20 paired seeds.
Outcome check9() {
  const std::size_t m = 1024, n = 64;
  Rng setup(0xacc9);
  const Mat W = sample_orthonormal_frame(m, n, setup);
  Vec w = normalized(matvec(W, rand_vec(setup, n)));
  axpy(w, 0.05, normalized(rand_vec(setup, m)));  // small off-subspace component
  auto victim = make_linear_victim(w, Vec(m));

  const ProjectionFactory full = [](const Vec& xb) { return identity_projection(xb); };
  const ProjectionFactory sub = [&W](const Vec& xb) { return orthonormal_projection(W, xb); };

  std::vector<double> mse_full, mse_sub;
  std::size_t wins = 0, ties = 0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto pair = sample_attack_pairs(*victim.oracle, {1, 1.0, 0xacc9 + 7 * s, 100000});
    AttackConfig cfg;
    cfg.budget = 20000;
    cfg.theta = 1e-3;
    cfg.initial_B = 10;
    cfg.seed = s;
    const AttackResult a = run_attack(*victim.oracle, full, pair[0].first, pair[0].second, cfg);
    const AttackResult b = run_attack(*victim.oracle, sub, pair[0].first, pair[0].second, cfg);
    mse_full.push_back(a.final_mse);
    mse_sub.push_back(b.final_mse);
    if (b.final_mse < a.final_mse)
      ++wins;
    else if (b.final_mse == a.final_mse)
      ++ties;
  }
  const double med_full = median(mse_full), med_sub = median(mse_sub);
  const double p = sign_test_p(wins, 20 - ties);
  const bool pass = med_sub < med_full && p < 0.05;
  return {pass, fmt("median MSE subspace %.2e vs full %.2e, wins %zu/20, sign-test p %.4f",
                    med_sub, med_full, wins, p)};
}

// --------------------------------------------------------------- check 10 --
// The disagreement proxy tracks estimate quality: across a curvature sweep,
// Pearson correlation between omega_proxy and the true cosine is below -0.3.
Outcome check10() {
  const std::size_t m = 16;
  Rng setup(0xacca);
  const Vec w = normalized(rand_vec(setup, m));
  std::vector<double> proxies, cosines;
  Rng rng(0xaccad);
  for (const double curv : {0.0, 1.0, 2.0, 4.0, 8.0}) {
    Mat H(m, m);
    for (std::size_t i = 0; i < m; ++i) {
      const double mag = 0.5 + 0.5 * setup.next_unit();
      H(i, i) = curv * ((setup.next_u64() & 1) ? mag : -mag);
    }
    auto victim = make_quadratic_victim(w, Vec(m), H);
    // Small base cloud keeps the local gradient near w, so the curvature
    // sweep controls the probe corruption instead of the gradient norm.
    auto base = boundary_point_sampler(*victim.oracle, 0.1, 1e-6);
    const EstimatorConfig cfg{32, 0.5, SamplingMode::normalized_gaussian, LiftMode::precise};
    for (std::size_t t = 0; t < 40; ++t) {
      const Vec x_b = base(rng);
      auto p = identity_projection(x_b);
      const GradientEstimate e = estimate_gradient(*p, *victim.oracle, cfg, rng);
      proxies.push_back(e.omega_proxy);
      cosines.push_back(cosine_to_truth(e, *victim.truth, x_b));
    }
  }
  const double r = oracles::pearson(proxies, cosines);
  return {r < -0.3, fmt("Pearson(proxy, cos) %.3f over %zu estimates", r, proxies.size())};
}

// --------------------------------------------------------------- check 11 --
// Serving a victim over TCP changes nothing: attack traces against the
// served endpoint are byte-identical to local traces for 5 seeds.
Outcome check11() {
  const std::size_t m = 8;
  Rng setup(0xaccb);
  const Vec w = rand_vec(setup, m);
  const Vec b = scale(rand_vec(setup, m), 0.2);
  auto local = make_linear_victim(w, b);
  auto served = make_linear_victim(w, b);
  VictimServer server(std::move(served.oracle), "127.0.0.1", 0);
  server.start();
  const std::string address = "127.0.0.1:" + std::to_string(server.port());

  const ProjectionFactory factory = [](const Vec& xb) { return identity_projection(xb); };
  std::size_t identical = 0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto pair = sample_attack_pairs(*local.oracle, {1, 1.0, 0xaccb + seed, 100000});
    AttackConfig cfg;
    cfg.budget = 600;
    cfg.theta = 1e-3;
    cfg.seed = seed;
    const AttackResult here = run_attack(*local.oracle, factory, pair[0].first, pair[0].second,
                                         cfg);
    auto remote = connect_remote_victim(address, m, 5000);
    const AttackResult there = run_attack(*remote, factory, pair[0].first, pair[0].second, cfg);
    identical += trace_to_csv(here.trace) == trace_to_csv(there.trace) ? 1 : 0;
  }
  server.stop();
  return {identical == 5, fmt("byte-identical traces %zu/5", identical)};
}

struct Criterion {
  int id;
  const char* label;
  Outcome (*fn)();
};

const Criterion kCriteria[] = {
    {1, "dimension constant stays in (2/pi, 1) and decreasing", check1},
    {2, "sampled direction cosines match the closed-form CDF", check2},
    {3, "frame-mode raw estimate norm is exactly 1/sqrt(B)", check3},
    {4, "estimator reduces to both published special cases", check4},
    {5, "mean cosine lands inside the predicted sandwich", check5},
    {6, "mean cosine scales like sqrt(B)", check6},
    {7, "sharp indicator is smaller; construction honors ceilings", check7},
    {8, "attack stays adversarial and converges on the tanh net", check8},
    {9, "subspace projection beats full-space on matched budgets", check9},
    {10, "disagreement proxy anticorrelates with true cosine", check10},
    {11, "served victims reproduce local attack traces exactly", check11},
};

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--only") == 0 && i + 1 < argc) only = std::atoi(argv[++i]);
  }

  int failures = 0;
  for (const Criterion& c : kCriteria) {
    if (only != 0 && only != c.id) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s  %2d  %-58s [%6.2fs]  %s\n", o.pass ? "PASS" : "FAIL", c.id, c.label, secs,
                o.detail.c_str());
    std::fflush(stdout);
    failures += o.pass ? 0 : 1;
  }
  return failures;
}
