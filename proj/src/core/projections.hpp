#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>

#include <json.hpp>

#include "rng.hpp"
#include "vec.hpp"
#include "victims.hpp"

namespace attacklab {

// Map f from an n-dimensional latent space into the m-dimensional ambient
// space, anchored so that the latent base point lands on a registered
// boundary image x_b. Immutable after construction; apply/jacobian are pure.
class Projection {
 public:
  virtual ~Projection() = default;

  std::size_t n() const { return n_; }
  std::size_t m() const { return x_b_.dim(); }
  const Vec& base_point() const { return x0_; }       // latent, all zeros
  const Vec& boundary_image() const { return x_b_; }  // f(base)

  // Displacement f(base + u) - x_b, computed directly (no add/subtract round
  // trip) so linear kinds reproduce their textbook estimators bit for bit.
  virtual Vec direction(const Vec& u) const = 0;

  Vec apply(const Vec& v) const {
    require_dim(v, n_, "projection input");
    return add(x_b_, direction(sub(v, x0_)));
  }

  virtual const Mat& jacobian_at_base() const = 0;

  // Analytic Lipschitz/smoothness constants, for kinds that know them.
  struct DeclaredConstants {
    double L_f = 0.0, l_f = 0.0, beta_f = 0.0;
  };
  virtual bool has_declared_constants() const { return false; }
  virtual DeclaredConstants declared_constants() const { return {}; }

 protected:
  Projection(std::size_t n, Vec x_b) : n_(n), x0_(n), x_b_(std::move(x_b)) {}

 private:
  std::size_t n_;
  Vec x0_;
  Vec x_b_;
};

// f(v) = x_b + v (n = m); the plain full-space estimator's map.
std::unique_ptr<Projection> identity_projection(const Vec& x_b);

// f(v) = x_b + W v with W^T W = I_n (within 1e-10).
std::unique_ptr<Projection> orthonormal_projection(const Mat& W, const Vec& x_b);

// Bilinear upsampling of an n_side x n_side grid (per channel) to
// m_side x m_side with wrap-around edges; columns normalized to unit norm.
std::unique_ptr<Projection> upsample_projection(std::size_t n_side, std::size_t m_side,
                                                std::size_t channels, const Vec& x_b);

// f(base + u) = x_b + J u - 1/2 alpha |u| J u. Curvature is adjustable via
// alpha >= 0; the implied smoothness constant is 1.25 * alpha * sigma_max(J).
std::unique_ptr<Projection> constructed_nonlinear_b(const Mat& J, const Vec& x_b, double alpha);

// f(base + u) = x_b + J u + 1/2 sgn(<u,v>) <u,v>^2 k grad_S with
// v = J^T grad_S / |J^T grad_S|. Needs the true gradient: whitebox only.
std::unique_ptr<Projection> constructed_nonlinear_a(const Mat& J, const Vec& x_b,
                                                    const Vec& grad_S, double k);

// f(v) = x_b + D(v) - D(0) for a decoder D loaded from a JSON weight file.
std::unique_ptr<Projection> decoder_projection(const std::string& weight_file, const Vec& x_b);

// Spectral extremes of the base Jacobian plus a sampled smoothness estimate:
// max over point pairs inside the delta-ball of the operator norm of the
// finite-difference Jacobian gap divided by the pair distance.
struct ProjectionConstants {
  double L_f = 0.0, l_f = 0.0, beta_f = 0.0;
};
ProjectionConstants measure_projection_constants(const Projection& p, double delta,
                                                 std::size_t samples, Rng& rng);
ProjectionConstants measure_projection_constants(const Projection& p, double delta,
                                                 std::size_t samples);

// CLI-facing description; J for the constructed kinds and W for the
// orthonormal kind (when not given explicitly) are drawn from haar_seed.
struct ProjectionSpec {
  std::string kind;  // identity | orthonormal | upsample | constructed_a | constructed_b | decoder
  std::size_t n = 0;            // latent dim for orthonormal/constructed kinds
  Mat W;                        // explicit orthonormal columns (optional)
  std::uint64_t haar_seed = 1;  // seed for sampled frames
  std::size_t n_side = 0, m_side = 0, channels = 1;  // upsample
  double alpha = 0.0;           // constructed_b
  double k = 0.0;               // constructed_a
  std::string weight_file;      // decoder
};

bool projection_needs_whitebox(const ProjectionSpec& spec);

// Binds the spec to a concrete boundary image; truth is required only by
// constructed_a (for grad_S at x_b) and may be null otherwise.
std::unique_ptr<Projection> make_projection(const ProjectionSpec& spec, const Vec& x_b,
                                            const GroundTruth* truth);

ProjectionSpec projection_spec_from_json(const nlohmann::json& j);
nlohmann::json projection_spec_to_json(const ProjectionSpec& spec);
ProjectionSpec load_projection_spec(const std::string& path);

}  // namespace attacklab
