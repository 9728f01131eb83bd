#pragma once

#include <cstddef>
#include <vector>

#include "vec.hpp"

namespace attacklab {

// One affine layer, optionally followed by tanh. Used both by the built-in
// victim networks (tanh hidden layers, identity output) and by decoder-style
// nonlinear projections loaded from disk, which carry an explicit activation
// flag per layer.
struct DenseLayer {
  Mat W;
  Vec b;
  bool tanh_act = false;
};

class Mlp {
 public:
  explicit Mlp(std::vector<DenseLayer> layers);

  std::size_t in_dim() const { return layers_.front().W.cols(); }
  std::size_t out_dim() const { return layers_.back().W.rows(); }
  const std::vector<DenseLayer>& layers() const { return layers_; }

  Vec forward(const Vec& x) const;

  // Forward pass that records every post-activation value; acts[0] is the
  // input and acts[k] the output of layer k-1.
  Vec forward_tape(const Vec& x, std::vector<Vec>& acts) const;

  // Gradient of <coeffs, output(x)> with respect to x (reverse mode).
  Vec grad_scalar(const Vec& x, const Vec& coeffs) const;

  // Full Jacobian d output / d x (forward accumulation).
  Mat jacobian(const Vec& x) const;

 private:
  std::vector<DenseLayer> layers_;
};

}  // namespace attacklab
