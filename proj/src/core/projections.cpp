#include "projections.hpp"

#include <cmath>
#include <fstream>
#include <utility>
#include <vector>

#include <json.hpp>

#include "errors.hpp"
#include "linalg.hpp"
#include "mlp.hpp"
#include "sampling.hpp"

namespace attacklab {
namespace {

class IdentityProjection final : public Projection {
 public:
  explicit IdentityProjection(const Vec& x_b)
      : Projection(x_b.dim(), x_b), jac_(Mat::identity(x_b.dim())) {}

  Vec direction(const Vec& u) const override {
    require_dim(u, n(), "projection offset");
    return u;
  }
  const Mat& jacobian_at_base() const override { return jac_; }
  bool has_declared_constants() const override { return true; }
  DeclaredConstants declared_constants() const override { return {1.0, 1.0, 0.0}; }

 private:
  Mat jac_;
};

class LinearProjection final : public Projection {
 public:
  // Declared constants are supplied by the factories that know them.
  LinearProjection(Mat W, const Vec& x_b, bool declared, DeclaredConstants dc)
      : Projection(W.cols(), x_b), jac_(std::move(W)), declared_(declared), dc_(dc) {
    if (jac_.rows() != x_b.dim())
      fail(ErrorKind::invalid_argument, "projection: W rows must match ambient dim");
  }

  Vec direction(const Vec& u) const override {
    require_dim(u, n(), "projection offset");
    return matvec(jac_, u);
  }
  const Mat& jacobian_at_base() const override { return jac_; }
  bool has_declared_constants() const override { return declared_; }
  DeclaredConstants declared_constants() const override { return dc_; }

 private:
  Mat jac_;
  bool declared_;
  DeclaredConstants dc_;
};

class ConstructedB final : public Projection {
 public:
  ConstructedB(Mat J, const Vec& x_b, double alpha)
      : Projection(J.cols(), x_b), jac_(std::move(J)), alpha_(alpha) {
    if (jac_.rows() != x_b.dim())
      fail(ErrorKind::invalid_argument, "projection: J rows must match ambient dim");
    if (!(alpha >= 0.0))
      fail(ErrorKind::invalid_argument, "constructed_b: alpha must be nonnegative");
    const auto se = spectral_extremes(jac_);
    dc_ = {se.sigma_max, se.sigma_min, 1.25 * alpha * se.sigma_max};
  }

  Vec direction(const Vec& u) const override {
    require_dim(u, n(), "projection offset");
    Vec t = matvec(jac_, u);
    const double factor = 1.0 - 0.5 * alpha_ * norm(u);
    for (std::size_t i = 0; i < t.dim(); ++i) t[i] *= factor;
    return t;
  }
  const Mat& jacobian_at_base() const override { return jac_; }
  bool has_declared_constants() const override { return true; }
  DeclaredConstants declared_constants() const override { return dc_; }

 private:
  Mat jac_;
  double alpha_;
  DeclaredConstants dc_;
};

class ConstructedA final : public Projection {
 public:
  ConstructedA(Mat J, const Vec& x_b, const Vec& grad_S, double k)
      : Projection(J.cols(), x_b), jac_(std::move(J)), grad_(grad_S), k_(k) {
    if (jac_.rows() != x_b.dim())
      fail(ErrorKind::invalid_argument, "projection: J rows must match ambient dim");
    require_dim(grad_, x_b.dim(), "constructed_a gradient");
    if (!(k >= 0.0)) fail(ErrorKind::invalid_argument, "constructed_a: k must be nonnegative");
    const Vec jt = matvec_t(jac_, grad_);
    const double jt_norm = norm(jt);
    if (!(jt_norm > 0.0))
      fail(ErrorKind::invalid_argument,
           "constructed_a: gradient must have a nonzero latent pullback");
    v_ = scale(jt, 1.0 / jt_norm);
    const auto se = spectral_extremes(jac_);
    dc_ = {se.sigma_max, se.sigma_min, k * norm(grad_)};
  }

  Vec direction(const Vec& u) const override {
    require_dim(u, n(), "projection offset");
    Vec t = matvec(jac_, u);
    const double c = dot(u, v_);
    const double coeff = 0.5 * (c >= 0.0 ? 1.0 : -1.0) * c * c * k_;
    axpy(t, coeff, grad_);
    return t;
  }
  const Mat& jacobian_at_base() const override { return jac_; }
  bool has_declared_constants() const override { return true; }
  DeclaredConstants declared_constants() const override { return dc_; }

 private:
  Mat jac_;
  Vec grad_;
  double k_;
  Vec v_;  // normalized latent pullback of grad_S
  DeclaredConstants dc_;
};

class DecoderProjection final : public Projection {
 public:
  DecoderProjection(Mlp net, const Vec& x_b)
      : Projection(net.in_dim(), x_b),
        net_(std::move(net)),
        d0_(net_.forward(Vec(net_.in_dim()))),
        jac_(net_.jacobian(Vec(net_.in_dim()))) {}

  Vec direction(const Vec& u) const override { return sub(net_.forward(u), d0_); }
  const Mat& jacobian_at_base() const override { return jac_; }

 private:
  Mlp net_;
  Vec d0_;
  Mat jac_;
};

Mat parse_weight_mat(const nlohmann::json& j) {
  if (!j.is_array() || j.empty() || !j[0].is_array())
    fail(ErrorKind::config, "decoder file: 'w' must be an array of rows");
  const std::size_t cols = j[0].size();
  Mat m(j.size(), cols);
  for (std::size_t r = 0; r < j.size(); ++r) {
    if (!j[r].is_array() || j[r].size() != cols)
      fail(ErrorKind::config, "decoder file: ragged weight rows");
    for (std::size_t c = 0; c < cols; ++c) {
      if (!j[r][c].is_number()) fail(ErrorKind::config, "decoder file: non-numeric weight");
      m(r, c) = j[r][c].get<double>();
    }
  }
  return m;
}

// Central-difference Jacobian of p.direction at latent point x.
Mat fd_direction_jacobian(const Projection& p, const Vec& x) {
  const double h = 1e-5 * (1.0 + norm(x));
  Mat J(p.m(), p.n());
  for (std::size_t j = 0; j < p.n(); ++j) {
    Vec hi = x, lo = x;
    hi[j] += h;
    lo[j] -= h;
    const Vec dhi = p.direction(hi);
    const Vec dlo = p.direction(lo);
    for (std::size_t i = 0; i < p.m(); ++i) J(i, j) = (dhi[i] - dlo[i]) / (2.0 * h);
  }
  return J;
}

}  // namespace

std::unique_ptr<Projection> identity_projection(const Vec& x_b) {
  if (x_b.dim() == 0) fail(ErrorKind::invalid_argument, "projection: empty boundary image");
  return std::make_unique<IdentityProjection>(x_b);
}

std::unique_ptr<Projection> orthonormal_projection(const Mat& W, const Vec& x_b) {
  if (W.rows() == 0 || W.cols() == 0 || W.cols() > W.rows())
    fail(ErrorKind::invalid_argument, "orthonormal projection: need m x n with n <= m");
  const Mat g = gram(W);
  for (std::size_t i = 0; i < g.rows(); ++i)
    for (std::size_t j = 0; j < g.cols(); ++j) {
      const double want = (i == j) ? 1.0 : 0.0;
      if (std::abs(g(i, j) - want) > 1e-10)
        fail(ErrorKind::invalid_argument, "orthonormal projection: W^T W deviates from I");
    }
  return std::make_unique<LinearProjection>(W, x_b, true,
                                            Projection::DeclaredConstants{1.0, 1.0, 0.0});
}

std::unique_ptr<Projection> upsample_projection(std::size_t n_side, std::size_t m_side,
                                                std::size_t channels, const Vec& x_b) {
  if (n_side == 0 || channels == 0 || m_side == 0 || m_side % n_side != 0)
    fail(ErrorKind::invalid_argument, "upsample projection: m_side must be a multiple of n_side");
  const std::size_t m = m_side * m_side * channels;
  const std::size_t n = n_side * n_side * channels;
  if (x_b.dim() != m)
    fail(ErrorKind::invalid_argument, "upsample projection: boundary image dim mismatch");
  const std::size_t s = m_side / n_side;

  // Wrap-around bilinear kernel: every latent pixel's column is a cyclic
  // shift of the same stencil, so constants map to constants and all column
  // norms coincide (then normalize to exactly unit columns).
  Mat W(m, n);
  for (std::size_t ch = 0; ch < channels; ++ch) {
    for (std::size_t r = 0; r < m_side; ++r) {
      const std::size_t y0 = r / s, y1 = (y0 + 1) % n_side;
      const double wy1 = static_cast<double>(r % s) / static_cast<double>(s);
      const double wy0 = 1.0 - wy1;
      for (std::size_t c = 0; c < m_side; ++c) {
        const std::size_t x0 = c / s, x1 = (x0 + 1) % n_side;
        const double wx1 = static_cast<double>(c % s) / static_cast<double>(s);
        const double wx0 = 1.0 - wx1;
        const std::size_t row = ch * m_side * m_side + r * m_side + c;
        const std::size_t base = ch * n_side * n_side;
        W(row, base + y0 * n_side + x0) += wy0 * wx0;
        W(row, base + y0 * n_side + x1) += wy0 * wx1;
        W(row, base + y1 * n_side + x0) += wy1 * wx0;
        W(row, base + y1 * n_side + x1) += wy1 * wx1;
      }
    }
  }
  for (std::size_t j = 0; j < n; ++j) {
    double nu_sq = 0.0;
    for (std::size_t i = 0; i < m; ++i) nu_sq += W(i, j) * W(i, j);
    const double nu = std::sqrt(nu_sq);
    for (std::size_t i = 0; i < m; ++i) W(i, j) /= nu;
  }
  return std::make_unique<LinearProjection>(std::move(W), x_b, false,
                                            Projection::DeclaredConstants{});
}

std::unique_ptr<Projection> constructed_nonlinear_b(const Mat& J, const Vec& x_b, double alpha) {
  return std::make_unique<ConstructedB>(J, x_b, alpha);
}

std::unique_ptr<Projection> constructed_nonlinear_a(const Mat& J, const Vec& x_b,
                                                    const Vec& grad_S, double k) {
  return std::make_unique<ConstructedA>(J, x_b, grad_S, k);
}

std::unique_ptr<Projection> decoder_projection(const std::string& weight_file, const Vec& x_b) {
  std::ifstream in(weight_file);
  if (!in) fail(ErrorKind::io, "cannot open decoder file '" + weight_file + "'");
  nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded() || !j.is_object() || !j.contains("layers") || !j["layers"].is_array() ||
      j["layers"].empty() || !j.contains("n") || !j.contains("m"))
    fail(ErrorKind::config, "decoder file: need {layers, n, m}");

  std::vector<DenseLayer> layers;
  for (const auto& lj : j["layers"]) {
    if (!lj.is_object() || !lj.contains("w") || !lj.contains("b") || !lj.contains("act"))
      fail(ErrorKind::config, "decoder file: each layer needs w, b, act");
    const std::string act = lj["act"].is_string() ? lj["act"].get<std::string>() : "";
    if (act != "tanh" && act != "id")
      fail(ErrorKind::config, "decoder file: act must be 'tanh' or 'id'");
    Mat W = parse_weight_mat(lj["w"]);
    if (!lj["b"].is_array() || lj["b"].size() != W.rows())
      fail(ErrorKind::config, "decoder file: bias length must match weight rows");
    Vec b(W.rows());
    for (std::size_t i = 0; i < b.dim(); ++i) {
      if (!lj["b"][i].is_number()) fail(ErrorKind::config, "decoder file: non-numeric bias");
      b[i] = lj["b"][i].get<double>();
    }
    layers.push_back({std::move(W), std::move(b), act == "tanh"});
  }
  Mlp net(std::move(layers));
  if (!j["n"].is_number_unsigned() || !j["m"].is_number_unsigned() ||
      net.in_dim() != j["n"].get<std::size_t>() || net.out_dim() != j["m"].get<std::size_t>())
    fail(ErrorKind::invalid_argument, "decoder file: declared n/m do not match the layers");
  if (net.out_dim() != x_b.dim())
    fail(ErrorKind::invalid_argument, "decoder projection: output dim must match x_b");
  return std::make_unique<DecoderProjection>(std::move(net), x_b);
}

ProjectionConstants measure_projection_constants(const Projection& p, double delta,
                                                 std::size_t samples, Rng& rng) {
  if (!(delta > 0.0)) fail(ErrorKind::invalid_argument, "measure: delta must be positive");
  if (samples < 2) fail(ErrorKind::invalid_argument, "measure: need at least 2 sample pairs");
  const auto se = spectral_extremes(p.jacobian_at_base());
  double beta = 0.0;
  for (std::size_t s = 0; s < samples; ++s) {
    Vec x, y;
    double gap = 0.0;
    do {
      x = scale(sample_unit_sphere(p.n(), rng), delta * rng.next_unit());
      y = scale(sample_unit_sphere(p.n(), rng), delta * rng.next_unit());
      gap = distance(x, y);
    } while (gap < 1e-3 * delta);
    const Mat diff = mat_sub(fd_direction_jacobian(p, x), fd_direction_jacobian(p, y));
    beta = std::max(beta, operator_norm(diff) / gap);
  }
  return {se.sigma_max, se.sigma_min, beta};
}

ProjectionConstants measure_projection_constants(const Projection& p, double delta,
                                                 std::size_t samples) {
  Rng rng(0xbe7af1aeULL);
  return measure_projection_constants(p, delta, samples, rng);
}

bool projection_needs_whitebox(const ProjectionSpec& spec) {
  return spec.kind == "constructed_a";
}

std::unique_ptr<Projection> make_projection(const ProjectionSpec& spec, const Vec& x_b,
                                            const GroundTruth* truth) {
  const std::size_t m = x_b.dim();
  const auto frame_or_given = [&]() -> Mat {
    if (spec.W.rows() > 0) return spec.W;
    if (spec.n == 0 || spec.n > m)
      fail(ErrorKind::config, "projection spec: need 1 <= n <= m for kind '" + spec.kind + "'");
    Rng rng(spec.haar_seed);
    return sample_orthonormal_frame(m, spec.n, rng);
  };

  if (spec.kind == "identity") return identity_projection(x_b);
  if (spec.kind == "orthonormal") return orthonormal_projection(frame_or_given(), x_b);
  if (spec.kind == "upsample")
    return upsample_projection(spec.n_side, spec.m_side, spec.channels, x_b);
  if (spec.kind == "constructed_b")
    return constructed_nonlinear_b(frame_or_given(), x_b, spec.alpha);
  if (spec.kind == "constructed_a") {
    if (truth == nullptr)
      fail(ErrorKind::config, "constructed_a needs ground truth (whitebox only)");
    return constructed_nonlinear_a(frame_or_given(), x_b, truth->gradient(x_b), spec.k);
  }
  if (spec.kind == "decoder") return decoder_projection(spec.weight_file, x_b);
  fail(ErrorKind::config, "unknown projection kind '" + spec.kind + "'");
}

}  // namespace attacklab
