#ifndef ATTACKLAB_VEC_HPP
#define ATTACKLAB_VEC_HPP

#include <cstddef>
#include <initializer_list>
#include <vector>

namespace attacklab {

// Dense real vector with a fixed dimension.  Entries are owned contiguously;
// the kernel below is deliberately small -- just the operations the lab needs,
// with a pinned (index-ascending) accumulation order so repeated runs and
// reference re-computations agree bit for bit.
class Vec {
 public:
  Vec() = default;
  explicit Vec(std::size_t dim, double fill = 0.0) : v_(dim, fill) {}
  Vec(std::initializer_list<double> xs) : v_(xs) {}
  static Vec from(std::vector<double> xs) {
    Vec v;
    v.v_ = std::move(xs);
    return v;
  }

  std::size_t dim() const { return v_.size(); }
  double operator[](std::size_t i) const { return v_[i]; }
  double& operator[](std::size_t i) { return v_[i]; }
  const double* data() const { return v_.data(); }
  double* data() { return v_.data(); }
  const std::vector<double>& entries() const { return v_; }
  bool all_finite() const;

 private:
  std::vector<double> v_;
};

// Dense row-major matrix.
class Mat {
 public:
  Mat() = default;
  Mat(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), a_(rows * cols, fill) {}
  static Mat identity(std::size_t n);
  static Mat from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double operator()(std::size_t r, std::size_t c) const { return a_[r * cols_ + c]; }
  double& operator()(std::size_t r, std::size_t c) { return a_[r * cols_ + c]; }
  const double* row_data(std::size_t r) const { return a_.data() + r * cols_; }
  double* row_data(std::size_t r) { return a_.data() + r * cols_; }
  Vec col(std::size_t j) const;
  void set_col(std::size_t j, const Vec& v);
  bool all_finite() const;

 private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<double> a_;
};

double dot(const Vec& a, const Vec& b);
double norm(const Vec& a);
double distance(const Vec& a, const Vec& b);
Vec add(const Vec& a, const Vec& b);
Vec sub(const Vec& a, const Vec& b);
Vec scale(const Vec& a, double s);
// y += s * x
void axpy(Vec& y, double s, const Vec& x);
Vec normalized(const Vec& a);

Vec matvec(const Mat& a, const Vec& x);
// A^T x
Vec matvec_t(const Mat& a, const Vec& x);
// A^T A (small Gram matrices for spectral work)
Mat gram(const Mat& a);
Mat mat_sub(const Mat& a, const Mat& b);
Mat mat_scale(const Mat& a, double s);
// a * b^T for column vectors a (m), b (n) -> m x n
Mat outer(const Vec& a, const Vec& b);
Mat matmul(const Mat& a, const Mat& b);

void require_dim(const Vec& v, std::size_t dim, const char* what);

}  // namespace attacklab

#endif
