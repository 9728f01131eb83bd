#include "victims.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <utility>

#include "errors.hpp"
#include "linalg.hpp"
#include "sampling.hpp"

namespace attacklab {
namespace {

// Max gradient norm over {x} and {x + t d : t in {r/2, r}} for 64 sampled
// directions; a cheap stand-in for the true local Lipschitz constant.
double sampled_lipschitz(const GroundTruth& g, const Vec& x, double r, Rng& rng) {
  double best = norm(g.gradient(x));
  for (int i = 0; i < 64; ++i) {
    const Vec d = sample_unit_sphere(x.dim(), rng);
    for (const double t : {0.5 * r, r}) {
      Vec p = x;
      axpy(p, t, d);
      best = std::max(best, norm(g.gradient(p)));
    }
  }
  return best;
}

// ---------------------------------------------------------------- linear --

struct LinearParams {
  Vec w, b;
  double w_norm;
};

double linear_value(const LinearParams& p, const Vec& x) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.dim(); ++i) s += p.w[i] * (x[i] - p.b[i]);
  return s;
}

class LinearOracle final : public DifferenceOracle {
 public:
  explicit LinearOracle(std::shared_ptr<const LinearParams> p)
      : DifferenceOracle(p->w.dim(), 0, 1), p_(std::move(p)) {}

 private:
  int sign_at(const Vec& x) override {
    const double s = linear_value(*p_, x);
    if (s == 0.0) note_tie();
    return sign_of_score(s);
  }
  std::shared_ptr<const LinearParams> p_;
};

class LinearTruth final : public GroundTruth {
 public:
  explicit LinearTruth(std::shared_ptr<const LinearParams> p) : p_(std::move(p)) {}

  double value(const Vec& x) const override {
    require_dim(x, p_->w.dim(), "victim input");
    return linear_value(*p_, x);
  }
  Vec gradient(const Vec& x) const override {
    require_dim(x, p_->w.dim(), "victim input");
    return p_->w;
  }
  LocalConstants local_constants(const Vec&, double, Rng&) const override {
    return {p_->w_norm, 0.0};
  }

 private:
  std::shared_ptr<const LinearParams> p_;
};

// ------------------------------------------------------------- quadratic --

struct QuadParams {
  Vec w, b;
  Mat H;
  double beta;  // spectral radius of H
};

double quad_value(const QuadParams& p, const Vec& x) {
  Vec d = sub(x, p.b);
  const Vec Hd = matvec(p.H, d);
  return dot(p.w, d) + 0.5 * dot(d, Hd);
}

Vec quad_gradient(const QuadParams& p, const Vec& x) {
  const Vec d = sub(x, p.b);
  return add(p.w, matvec(p.H, d));
}

class QuadOracle final : public DifferenceOracle {
 public:
  explicit QuadOracle(std::shared_ptr<const QuadParams> p)
      : DifferenceOracle(p->w.dim(), 0, 1), p_(std::move(p)) {}

 private:
  int sign_at(const Vec& x) override {
    const double s = quad_value(*p_, x);
    if (s == 0.0) note_tie();
    return sign_of_score(s);
  }
  std::shared_ptr<const QuadParams> p_;
};

class QuadTruth final : public GroundTruth {
 public:
  explicit QuadTruth(std::shared_ptr<const QuadParams> p) : p_(std::move(p)) {}

  double value(const Vec& x) const override {
    require_dim(x, p_->w.dim(), "victim input");
    return quad_value(*p_, x);
  }
  Vec gradient(const Vec& x) const override {
    require_dim(x, p_->w.dim(), "victim input");
    return quad_gradient(*p_, x);
  }
  LocalConstants local_constants(const Vec& x, double r, Rng& rng) const override {
    if (!(r > 0.0)) fail(ErrorKind::invalid_argument, "local_constants: radius must be > 0");
    return {sampled_lipschitz(*this, x, r, rng), p_->beta};
  }

 private:
  std::shared_ptr<const QuadParams> p_;
};

// ------------------------------------------------------------------- mlp --

struct MlpParams {
  Mlp net;
  std::size_t y_ben, y_mal;
  Vec coeffs;  // e_{y_mal} - e_{y_ben} over the logits
};

class MlpOracle final : public DifferenceOracle {
 public:
  explicit MlpOracle(std::shared_ptr<const MlpParams> p)
      : DifferenceOracle(p->net.in_dim(), p->y_ben, p->y_mal), p_(std::move(p)) {}

 private:
  int sign_at(const Vec& x) override {
    const Vec logits = p_->net.forward(x);
    const double s = logits[p_->y_mal] - logits[p_->y_ben];
    if (s == 0.0) note_tie();
    return sign_of_score(s);
  }
  std::shared_ptr<const MlpParams> p_;
};

class MlpTruth final : public GroundTruth {
 public:
  explicit MlpTruth(std::shared_ptr<const MlpParams> p) : p_(std::move(p)) {}

  double value(const Vec& x) const override {
    const Vec logits = p_->net.forward(x);
    return logits[p_->y_mal] - logits[p_->y_ben];
  }
  Vec gradient(const Vec& x) const override { return p_->net.grad_scalar(x, p_->coeffs); }

  LocalConstants local_constants(const Vec& x, double r, Rng& rng) const override {
    if (!(r > 0.0)) fail(ErrorKind::invalid_argument, "local_constants: radius must be > 0");
    // Shared sample set: the center plus two offsets along each direction.
    std::vector<Vec> pts;
    pts.reserve(129);
    pts.push_back(x);
    for (int i = 0; i < 64; ++i) {
      const Vec d = sample_unit_sphere(x.dim(), rng);
      for (const double t : {0.5 * r, r}) {
        Vec p = x;
        axpy(p, t, d);
        pts.push_back(std::move(p));
      }
    }
    std::vector<Vec> grads;
    grads.reserve(pts.size());
    for (const auto& p : pts) grads.push_back(gradient(p));

    LocalConstants c;
    for (const auto& g : grads) c.L_S = std::max(c.L_S, norm(g));
    for (std::size_t i = 0; i < pts.size(); ++i) {
      for (std::size_t j = i + 1; j < pts.size(); ++j) {
        const double gap = distance(pts[i], pts[j]);
        if (gap <= 0.0) continue;
        c.beta_S = std::max(c.beta_S, distance(grads[i], grads[j]) / gap);
      }
    }
    return c;
  }

 private:
  std::shared_ptr<const MlpParams> p_;
};

}  // namespace

Victim make_linear_victim(const Vec& w, const Vec& b) {
  require_dim(b, w.dim(), "linear victim offset");
  const double n = norm(w);
  if (!(n > 0.0)) fail(ErrorKind::invalid_argument, "degenerate linear victim: w has zero norm");
  auto p = std::make_shared<const LinearParams>(LinearParams{w, b, n});
  return {std::make_unique<LinearOracle>(p), std::make_unique<LinearTruth>(p)};
}

Victim make_quadratic_victim(const Vec& w, const Vec& b, const Mat& H) {
  const std::size_t m = w.dim();
  require_dim(b, m, "quadratic victim offset");
  if (H.rows() != m || H.cols() != m)
    fail(ErrorKind::invalid_argument, "quadratic victim: H must be m x m");
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j)
      if (std::abs(H(i, j) - H(j, i)) > 1e-12)
        fail(ErrorKind::invalid_argument, "quadratic victim: H is not symmetric");
  const double beta = (m > 0) ? spectral_radius_sym(H) : 0.0;
  auto p = std::make_shared<const QuadParams>(QuadParams{w, b, H, beta});
  return {std::make_unique<QuadOracle>(p), std::make_unique<QuadTruth>(p)};
}

Victim make_mlp_victim(const std::vector<Mat>& weights, const std::vector<Vec>& biases,
                       std::size_t y_ben, std::size_t y_mal) {
  if (weights.size() != biases.size() || weights.empty())
    fail(ErrorKind::invalid_argument, "mlp victim: need matching weight/bias lists");
  std::vector<DenseLayer> layers;
  layers.reserve(weights.size());
  for (std::size_t k = 0; k < weights.size(); ++k) {
    const bool hidden = k + 1 < weights.size();
    layers.push_back({weights[k], biases[k], hidden});
  }
  Mlp net(std::move(layers));
  const std::size_t C = net.out_dim();
  if (C < 2) fail(ErrorKind::invalid_argument, "mlp victim: need at least two classes");
  if (y_ben == y_mal || y_ben >= C || y_mal >= C)
    fail(ErrorKind::invalid_argument, "mlp victim: bad class labels");
  Vec coeffs(C);
  coeffs[y_mal] = 1.0;
  coeffs[y_ben] = -1.0;
  auto p = std::make_shared<const MlpParams>(MlpParams{std::move(net), y_ben, y_mal, coeffs});
  return {std::make_unique<MlpOracle>(p), std::make_unique<MlpTruth>(p)};
}

}  // namespace attacklab
