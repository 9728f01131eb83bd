#include "mlp.hpp"

#include <cmath>
#include <utility>

#include "errors.hpp"

namespace attacklab {

Mlp::Mlp(std::vector<DenseLayer> layers) : layers_(std::move(layers)) {
  if (layers_.empty()) fail(ErrorKind::invalid_argument, "mlp: no layers");
  for (std::size_t k = 0; k < layers_.size(); ++k) {
    const auto& L = layers_[k];
    if (L.W.rows() == 0 || L.W.cols() == 0)
      fail(ErrorKind::invalid_argument, "mlp: empty weight matrix");
    if (L.b.dim() != L.W.rows())
      fail(ErrorKind::invalid_argument, "mlp: bias/weight row mismatch");
    if (k > 0 && L.W.cols() != layers_[k - 1].W.rows())
      fail(ErrorKind::invalid_argument, "mlp: layer shapes do not chain");
  }
}

static Vec layer_apply(const DenseLayer& L, const Vec& x) {
  Vec z = matvec(L.W, x);
  for (std::size_t i = 0; i < z.dim(); ++i) {
    z[i] += L.b[i];
    if (L.tanh_act) z[i] = std::tanh(z[i]);
  }
  return z;
}

Vec Mlp::forward(const Vec& x) const {
  require_dim(x, in_dim(), "mlp input");
  Vec a = x;
  for (const auto& L : layers_) a = layer_apply(L, a);
  return a;
}

Vec Mlp::forward_tape(const Vec& x, std::vector<Vec>& acts) const {
  require_dim(x, in_dim(), "mlp input");
  acts.clear();
  acts.reserve(layers_.size() + 1);
  acts.push_back(x);
  for (const auto& L : layers_) acts.push_back(layer_apply(L, acts.back()));
  return acts.back();
}

Vec Mlp::grad_scalar(const Vec& x, const Vec& coeffs) const {
  require_dim(coeffs, out_dim(), "mlp output coefficients");
  std::vector<Vec> acts;
  forward_tape(x, acts);
  // g holds the adjoint of layer k's post-activation output.
  Vec g = coeffs;
  for (std::size_t k = layers_.size(); k-- > 0;) {
    const auto& L = layers_[k];
    if (L.tanh_act) {
      const Vec& a = acts[k + 1];
      for (std::size_t i = 0; i < g.dim(); ++i) g[i] *= 1.0 - a[i] * a[i];
    }
    g = matvec_t(L.W, g);
  }
  return g;
}

Mat Mlp::jacobian(const Vec& x) const {
  std::vector<Vec> acts;
  forward_tape(x, acts);
  // Forward accumulation: J after layer k is d acts[k+1] / d x.
  Mat J;
  for (std::size_t k = 0; k < layers_.size(); ++k) {
    const auto& L = layers_[k];
    J = (k == 0) ? L.W : matmul(L.W, J);
    if (L.tanh_act) {
      const Vec& a = acts[k + 1];
      for (std::size_t r = 0; r < J.rows(); ++r) {
        const double d = 1.0 - a[r] * a[r];
        double* row = J.row_data(r);
        for (std::size_t c = 0; c < J.cols(); ++c) row[c] *= d;
      }
    }
  }
  return J;
}

}  // namespace attacklab
