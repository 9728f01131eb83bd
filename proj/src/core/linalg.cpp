#include "linalg.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "errors.hpp"

namespace attacklab {
namespace {

double off_diagonal_norm(const Mat& a) {
  double s = 0.0;
  for (std::size_t p = 0; p + 1 < a.rows(); ++p)
    for (std::size_t q = p + 1; q < a.cols(); ++q) s += a(p, q) * a(p, q);
  return std::sqrt(2.0 * s);
}

double frobenius(const Mat& a) {
  double s = 0.0;
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (std::size_t c = 0; c < a.cols(); ++c) s += a(r, c) * a(r, c);
  return std::sqrt(s);
}

// A A^T (companion to gram() when the row side is smaller).
Mat gram_rows(const Mat& a) {
  Mat g(a.rows(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = i; j < a.rows(); ++j) {
      double s = 0.0;
      for (std::size_t c = 0; c < a.cols(); ++c) s += a(i, c) * a(j, c);
      g(i, j) = s;
      g(j, i) = s;
    }
  return g;
}

}  // namespace

std::vector<double> sym_eigenvalues(const Mat& input) {
  if (input.rows() != input.cols() || input.rows() == 0)
    fail(ErrorKind::invalid_argument, "sym_eigenvalues: matrix must be square and non-empty");
  Mat a = input;
  const std::size_t n = a.rows();
  const double scale = frobenius(a);
  if (scale > 0.0) {
    for (int sweep = 0; sweep < 64; ++sweep) {
      if (off_diagonal_norm(a) <= 1e-15 * scale) break;
      for (std::size_t p = 0; p + 1 < n; ++p) {
        for (std::size_t q = p + 1; q < n; ++q) {
          const double apq = a(p, q);
          if (apq == 0.0) continue;
          const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
          double t;
          if (std::abs(theta) > 1e150) {
            t = 1.0 / (2.0 * theta);
          } else {
            t = 1.0 / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
            if (theta < 0.0) t = -t;
          }
          const double c = 1.0 / std::sqrt(t * t + 1.0);
          const double s = t * c;
          for (std::size_t k = 0; k < n; ++k) {
            const double akp = a(k, p), akq = a(k, q);
            a(k, p) = c * akp - s * akq;
            a(k, q) = s * akp + c * akq;
          }
          for (std::size_t k = 0; k < n; ++k) {
            const double apk = a(p, k), aqk = a(q, k);
            a(p, k) = c * apk - s * aqk;
            a(q, k) = s * apk + c * aqk;
          }
        }
      }
    }
  }
  std::vector<double> eig(n);
  for (std::size_t i = 0; i < n; ++i) eig[i] = a(i, i);
  return eig;
}

SpectralExtremes spectral_extremes(const Mat& j) {
  if (j.cols() == 0 || j.rows() < j.cols())
    fail(ErrorKind::invalid_argument, "spectral_extremes: need rows >= cols >= 1");
  const std::vector<double> eig = sym_eigenvalues(gram(j));
  double lo = eig[0], hi = eig[0];
  for (double e : eig) {
    lo = std::min(lo, e);
    hi = std::max(hi, e);
  }
  return {std::sqrt(std::max(hi, 0.0)), std::sqrt(std::max(lo, 0.0))};
}

double operator_norm(const Mat& a) {
  if (a.rows() == 0 || a.cols() == 0)
    fail(ErrorKind::invalid_argument, "operator_norm: empty matrix");
  const Mat g = a.cols() <= a.rows() ? gram(a) : gram_rows(a);
  double hi = 0.0;
  for (double e : sym_eigenvalues(g)) hi = std::max(hi, e);
  return std::sqrt(hi);
}

double spectral_radius_sym(const Mat& h) {
  double r = 0.0;
  for (double e : sym_eigenvalues(h)) r = std::max(r, std::abs(e));
  return r;
}

}  // namespace attacklab
