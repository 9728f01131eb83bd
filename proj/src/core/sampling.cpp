#include "sampling.hpp"

#include <cmath>
#include <string>

#include "errors.hpp"

namespace attacklab {

Vec sample_unit_sphere(std::size_t n, Rng& rng) {
  if (n < 1) fail(ErrorKind::invalid_argument, "sample_unit_sphere: dimension must be >= 1");
  Vec v(n);
  double norm_sq;
  do {
    norm_sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      v[i] = rng.next_gaussian();
      norm_sq += v[i] * v[i];
    }
  } while (norm_sq == 0.0);
  // Divide rather than multiply by a rounded reciprocal: for n = 1 the
  // quotient x / sqrt(x*x) is then exactly +-1.
  const double r = std::sqrt(norm_sq);
  for (std::size_t i = 0; i < n; ++i) v[i] /= r;
  return v;
}

Mat sample_orthonormal_frame(std::size_t n, std::size_t b, Rng& rng) {
  if (n < 1 || b < 1 || b > n)
    fail(ErrorKind::invalid_argument, "sample_orthonormal_frame: need 1 <= B <= n, got B=" +
                                          std::to_string(b) + " n=" + std::to_string(n));
  Mat frame(n, b);
  for (std::size_t j = 0; j < b; ++j) {
    Vec v(n);
    double r = 0.0;
    for (;;) {
      for (std::size_t i = 0; i < n; ++i) v[i] = rng.next_gaussian();
      // Two projection passes (classic "twice is enough") keep the frame
      // orthonormal to ~1e-15 even for nearly dependent draws.
      for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t k = 0; k < j; ++k) {
          double proj = 0.0;
          for (std::size_t i = 0; i < n; ++i) proj += frame(i, k) * v[i];
          for (std::size_t i = 0; i < n; ++i) v[i] -= proj * frame(i, k);
        }
      }
      r = norm(v);
      if (r >= 1e-12) break;  // otherwise the draw was (numerically) dependent: redraw
    }
    const double inv = 1.0 / r;
    for (std::size_t i = 0; i < n; ++i) frame(i, j) = v[i] * inv;
  }
  return frame;
}

}  // namespace attacklab
