#ifndef ATTACKLAB_SAMPLING_HPP
#define ATTACKLAB_SAMPLING_HPP

#include <cstddef>

#include "rng.hpp"
#include "vec.hpp"

namespace attacklab {

// Uniform draw from the unit sphere in R^n (Gaussian direction, normalized).
Vec sample_unit_sphere(std::size_t n, Rng& rng);

// B orthonormal columns in R^n (B <= n): Gaussian matrix followed by
// Gram-Schmidt with a re-orthogonalization pass.  A column whose residual
// norm falls below 1e-12 (numerically dependent draw) is re-drawn.
Mat sample_orthonormal_frame(std::size_t n, std::size_t b, Rng& rng);

}  // namespace attacklab

#endif
