#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <vector>

#include "core/errors.hpp"
#include "core/linalg.hpp"
#include "core/rng.hpp"
#include "core/sampling.hpp"
#include "core/special.hpp"
#include "core/theory.hpp"
#include "core/vec.hpp"
#include "support/oracles.hpp"

using namespace attacklab;

TEST_CASE("rng streams are deterministic and splittable") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

  // Child streams depend only on (key, tag), not on parent consumption.
  Rng c(42);
  Rng child_before = c.child(7);
  for (int i = 0; i < 10; ++i) c.next_u64();
  Rng child_after = c.child(7);
  for (int i = 0; i < 20; ++i) CHECK(child_before.next_u64() == child_after.next_u64());

  Rng d(42);
  CHECK(d.child(1).next_u64() != d.child(2).next_u64());
  CHECK(Rng(1).next_u64() != Rng(2).next_u64());
}

TEST_CASE("rng gaussians have sane first moments") {
  Rng rng(7);
  double mean = 0.0, var = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double g = rng.next_gaussian();
    mean += g;
    var += g * g;
  }
  mean /= n;
  var /= n;
  CHECK(std::abs(mean) < 0.01);
  CHECK(std::abs(var - 1.0) < 0.02);
}

TEST_CASE("sample_unit_sphere basics") {
  Rng rng(11);
  SUBCASE("n=1 gives exactly +1 or -1") {
    for (int i = 0; i < 50; ++i) {
      const Vec u = sample_unit_sphere(1, rng);
      CHECK((u[0] == 1.0 || u[0] == -1.0));
    }
  }
  SUBCASE("n=3 norm is 1 within 1e-12") {
    for (int i = 0; i < 50; ++i) {
      const Vec u = sample_unit_sphere(3, rng);
      CHECK(std::abs(norm(u) - 1.0) <= 1e-12);
    }
  }
  SUBCASE("n=0 rejected") {
    CHECK_THROWS_AS(sample_unit_sphere(0, rng), Error);
  }
}

TEST_CASE("sample_unit_sphere n=16 matches the inner-product law") {
  Rng rng(123);
  std::vector<double> xs(100000);
  for (auto& x : xs) x = sample_unit_sphere(16, rng)[0];  // v = e1
  const double ks = oracles::ks_statistic(xs, [](double x) { return pa_cdf(16, x); });
  CHECK(ks < 0.006);
}

TEST_CASE("sample_orthonormal_frame orthonormality and determinism") {
  Rng rng(5);
  SUBCASE("n=2 B=2 is orthogonal with |det| = 1") {
    const Mat u = sample_orthonormal_frame(2, 2, rng);
    const double det = u(0, 0) * u(1, 1) - u(0, 1) * u(1, 0);
    CHECK(std::abs(std::abs(det) - 1.0) <= 1e-10);
  }
  SUBCASE("n=8 B=3 gram is the identity within 1e-10") {
    const Mat u = sample_orthonormal_frame(8, 3, rng);
    const Mat g = gram(u);
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j)
        CHECK(std::abs(g(i, j) - (i == j ? 1.0 : 0.0)) < 1e-10);
  }
  SUBCASE("B > n rejected") {
    CHECK_THROWS_AS(sample_orthonormal_frame(3, 4, rng), Error);
  }
  SUBCASE("same seed gives bit-identical frames") {
    Rng r1(99), r2(99);
    const Mat a = sample_orthonormal_frame(16, 5, r1);
    const Mat b = sample_orthonormal_frame(16, 5, r2);
    for (std::size_t i = 0; i < 16; ++i)
      for (std::size_t j = 0; j < 5; ++j) CHECK(a(i, j) == b(i, j));
  }
}

TEST_CASE("frame column with B=1 follows the sphere law") {
  Rng rng(321);
  std::vector<double> xs(100000);
  for (auto& x : xs) x = sample_orthonormal_frame(16, 1, rng)(0, 0);
  const double ks = oracles::ks_statistic(xs, [](double x) { return pa_cdf(16, x); });
  CHECK(ks < 0.006);
}

TEST_CASE("frame law is rotation invariant") {
  // Distribution of <R u, v> must match that of <u, R^T v>.
  Rng setup(2024);
  const Mat r = sample_orthonormal_frame(8, 8, setup);  // a fixed rotation
  Vec v(8);
  v[0] = 1.0;
  const Vec rtv = matvec_t(r, v);

  Rng ra(1), rb(2);
  std::vector<double> batch_a(100000), batch_b(100000);
  for (auto& x : batch_a) x = dot(matvec(r, sample_unit_sphere(8, ra)), v);
  for (auto& x : batch_b) x = dot(sample_unit_sphere(8, rb), rtv);
  CHECK(oracles::ks_two_sample(batch_a, batch_b) < 0.01);
}

TEST_CASE("spectral_extremes") {
  SUBCASE("identity") {
    const auto [hi, lo] = spectral_extremes(Mat::identity(3));
    CHECK(hi == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(lo == doctest::Approx(1.0).epsilon(1e-10));
  }
  SUBCASE("diagonal 4x2 embedding") {
    Mat j(4, 2);
    j(0, 0) = 3.0;
    j(1, 1) = 2.0;
    const auto [hi, lo] = spectral_extremes(j);
    CHECK(hi == doctest::Approx(3.0).epsilon(1e-10));
    CHECK(lo == doctest::Approx(2.0).epsilon(1e-10));
  }
  SUBCASE("random 10x4 matches the one-sided Jacobi oracle") {
    Rng rng(77);
    Mat j(10, 4);
    for (std::size_t r = 0; r < 10; ++r)
      for (std::size_t c = 0; c < 4; ++c) j(r, c) = rng.next_gaussian();
    const auto [hi, lo] = spectral_extremes(j);
    const auto sv = oracles::jacobi_svd_singular_values(j);
    CHECK(hi == doctest::Approx(sv.front()).epsilon(1e-8));
    CHECK(lo == doctest::Approx(sv.back()).epsilon(1e-8));
  }
  SUBCASE("orthonormal columns give (1,1)") {
    Rng rng(31);
    const Mat w = sample_orthonormal_frame(12, 5, rng);
    const auto [hi, lo] = spectral_extremes(w);
    CHECK(hi == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(lo == doctest::Approx(1.0).epsilon(1e-8));
  }
  SUBCASE("empty rejected") {
    CHECK_THROWS_AS(spectral_extremes(Mat()), Error);
    Mat wide(2, 3, 1.0);
    CHECK_THROWS_AS(spectral_extremes(wide), Error);
  }
}

TEST_CASE("log_gamma hits reference values to 1e-13 absolute") {
  // Reference values rounded to binary64 from a high-precision evaluation.
  const struct {
    double x, lg;
  } table[] = {
      {0.5, 0x1.250d048e7a1bdp-1},
      {1.0, 0x0.0p+0},
      {1.5, -0x1.eeb95b094c191p-4},
      {2.0, 0x0.0p+0},
      {3.75, 0x1.7c9ff21d3df69p+0},
      {8.0, 0x1.10ce1f32dcc30p+3},
      {32.5, 0x1.3f48e4d43db42p+6},
      {100.0, 0x1.67225b4879462p+8},
      {250.25, 0x1.1a79d73848988p+10},
      {500.0, 0x1.45a3b50bd15c1p+11},
  };
  for (const auto& t : table) CHECK(std::abs(log_gamma(t.x) - t.lg) <= 1e-13);
  CHECK_THROWS_AS(log_gamma(0.0), Error);
  CHECK_THROWS_AS(log_gamma(-3.0), Error);
}

TEST_CASE("log_beta identities and accuracy") {
  CHECK(log_beta(1.0, 1.0) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(std::abs(log_beta(1.0, 0.5) - 0x1.62e42fefa39efp-1) <= 1e-12);   // ln 2
  CHECK(std::abs(log_beta(0.5, 0.5) - 0x1.250d048e7a1bdp+0) <= 1e-12);   // ln pi
  CHECK_THROWS_AS(log_beta(0.0, 1.0), Error);
  CHECK_THROWS_AS(log_beta(1.0, -1.0), Error);

  // Cross-check against the direct three-term form on a grid, including
  // large/small argument mixes where the direct form loses digits.
  for (double a : {0.5, 1.0, 2.5, 10.0, 31.0, 64.0, 200.0, 5000.0}) {
    for (double b : {0.5, 1.0, 3.0, 17.5, 64.0}) {
      const double mine = log_beta(a, b);
      const double ref = std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
      CHECK(mine == doctest::Approx(ref).epsilon(1e-11));
    }
  }
}

TEST_CASE("vector and matrix kernel guards") {
  Vec a{1.0, 2.0};
  Vec b{1.0, 2.0, 3.0};
  CHECK_THROWS_AS(dot(a, b), Error);
  CHECK_THROWS_AS(add(a, b), Error);
  Mat m(2, 3, 1.0);
  CHECK_THROWS_AS(matvec(m, a), Error);
  CHECK(matvec(m, b).dim() == 2);
  CHECK(matvec_t(m, a).dim() == 3);
  CHECK_THROWS_AS(normalized(Vec(3)), Error);
  CHECK(norm(normalized(Vec{3.0, 4.0})) == doctest::Approx(1.0));
}
