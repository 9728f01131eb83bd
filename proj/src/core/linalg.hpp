#ifndef ATTACKLAB_LINALG_HPP
#define ATTACKLAB_LINALG_HPP

#include <vector>

#include "vec.hpp"

namespace attacklab {

struct SpectralExtremes {
  double sigma_max = 0.0;
  double sigma_min = 0.0;
};

// All eigenvalues of a symmetric matrix (cyclic Jacobi rotations, values
// only), unsorted.
std::vector<double> sym_eigenvalues(const Mat& a);

// Largest and smallest singular values of a tall matrix (rows >= cols >= 1),
// computed from the eigenvalues of J^T J.
SpectralExtremes spectral_extremes(const Mat& j);

// Largest singular value of an arbitrary rectangular matrix (Gram matrix is
// formed on the smaller side).
double operator_norm(const Mat& a);

// max |eigenvalue| of a symmetric matrix.
double spectral_radius_sym(const Mat& h);

}  // namespace attacklab

#endif
