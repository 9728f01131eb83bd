#include "vec.hpp"

#include <cmath>
#include <string>

#include "errors.hpp"

namespace attacklab {

bool Vec::all_finite() const {
  for (double x : v_)
    if (!std::isfinite(x)) return false;
  return true;
}

Mat Mat::identity(std::size_t n) {
  Mat m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Mat Mat::from_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) fail(ErrorKind::invalid_argument, "matrix needs at least one row");
  Mat m(rows.size(), rows[0].size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != m.cols_)
      fail(ErrorKind::invalid_argument, "ragged matrix rows");
    for (std::size_t c = 0; c < m.cols_; ++c) m(r, c) = rows[r][c];
  }
  return m;
}

Vec Mat::col(std::size_t j) const {
  Vec v(rows_);
  for (std::size_t r = 0; r < rows_; ++r) v[r] = a_[r * cols_ + j];
  return v;
}

void Mat::set_col(std::size_t j, const Vec& v) {
  for (std::size_t r = 0; r < rows_; ++r) a_[r * cols_ + j] = v[r];
}

bool Mat::all_finite() const {
  for (double x : a_)
    if (!std::isfinite(x)) return false;
  return true;
}

void require_dim(const Vec& v, std::size_t dim, const char* what) {
  if (v.dim() != dim)
    fail(ErrorKind::invalid_argument, std::string(what) + ": expected dimension " +
                                          std::to_string(dim) + ", got " + std::to_string(v.dim()));
}

double dot(const Vec& a, const Vec& b) {
  require_dim(b, a.dim(), "dot");
  double s = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) s += a[i] * b[i];
  return s;
}

double norm(const Vec& a) { return std::sqrt(dot(a, a)); }

double distance(const Vec& a, const Vec& b) {
  require_dim(b, a.dim(), "distance");
  double s = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

Vec add(const Vec& a, const Vec& b) {
  require_dim(b, a.dim(), "add");
  Vec r(a.dim());
  for (std::size_t i = 0; i < a.dim(); ++i) r[i] = a[i] + b[i];
  return r;
}

Vec sub(const Vec& a, const Vec& b) {
  require_dim(b, a.dim(), "sub");
  Vec r(a.dim());
  for (std::size_t i = 0; i < a.dim(); ++i) r[i] = a[i] - b[i];
  return r;
}

Vec scale(const Vec& a, double s) {
  Vec r(a.dim());
  for (std::size_t i = 0; i < a.dim(); ++i) r[i] = a[i] * s;
  return r;
}

void axpy(Vec& y, double s, const Vec& x) {
  require_dim(x, y.dim(), "axpy");
  for (std::size_t i = 0; i < y.dim(); ++i) y[i] += s * x[i];
}

Vec normalized(const Vec& a) {
  const double n = norm(a);
  if (n == 0.0) fail(ErrorKind::invalid_argument, "cannot normalize zero vector");
  return scale(a, 1.0 / n);
}

Vec matvec(const Mat& a, const Vec& x) {
  require_dim(x, a.cols(), "matvec");
  Vec y(a.rows());
  for (std::size_t r = 0; r < a.rows(); ++r) {
    const double* row = a.row_data(r);
    double s = 0.0;
    for (std::size_t c = 0; c < a.cols(); ++c) s += row[c] * x[c];
    y[r] = s;
  }
  return y;
}

Vec matvec_t(const Mat& a, const Vec& x) {
  require_dim(x, a.rows(), "matvec_t");
  Vec y(a.cols());
  for (std::size_t r = 0; r < a.rows(); ++r) {
    const double* row = a.row_data(r);
    const double xr = x[r];
    for (std::size_t c = 0; c < a.cols(); ++c) y[c] += row[c] * xr;
  }
  return y;
}

Mat gram(const Mat& a) {
  Mat g(a.cols(), a.cols());
  for (std::size_t i = 0; i < a.cols(); ++i) {
    for (std::size_t j = i; j < a.cols(); ++j) {
      double s = 0.0;
      for (std::size_t r = 0; r < a.rows(); ++r) s += a(r, i) * a(r, j);
      g(i, j) = s;
      g(j, i) = s;
    }
  }
  return g;
}

Mat mat_sub(const Mat& a, const Mat& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    fail(ErrorKind::invalid_argument, "mat_sub: shape mismatch");
  Mat r(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) r(i, j) = a(i, j) - b(i, j);
  return r;
}

Mat mat_scale(const Mat& a, double s) {
  Mat r(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) r(i, j) = a(i, j) * s;
  return r;
}

Mat outer(const Vec& a, const Vec& b) {
  Mat r(a.dim(), b.dim());
  for (std::size_t i = 0; i < a.dim(); ++i)
    for (std::size_t j = 0; j < b.dim(); ++j) r(i, j) = a[i] * b[j];
  return r;
}

Mat matmul(const Mat& a, const Mat& b) {
  if (a.cols() != b.rows()) fail(ErrorKind::invalid_argument, "matmul: shape mismatch");
  Mat r(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      for (std::size_t j = 0; j < b.cols(); ++j) r(i, j) += aik * b(k, j);
    }
  return r;
}

}  // namespace attacklab
