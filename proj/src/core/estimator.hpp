#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "projections.hpp"
#include "rng.hpp"
#include "vec.hpp"
#include "victims.hpp"

namespace attacklab {

enum class SamplingMode { orthonormal_frame, normalized_gaussian };
enum class LiftMode { precise, approximate };

struct EstimatorConfig {
  std::size_t B = 0;    // sign queries per estimate
  double delta = 0.0;   // probe radius in latent space
  SamplingMode sampling_mode = SamplingMode::orthonormal_frame;
  LiftMode lift_mode = LiftMode::precise;
};

struct GradientEstimate {
  Vec raw_low;              // latent estimate (1/B) sum_i s_i u_i
  Vec lifted;               // ambient lift (empty until lift_estimate)
  std::vector<int> signs;   // oracle answers, sample order
  std::vector<Vec> samples; // unit directions u_i, sample order
  std::uint64_t queries_used = 0;
  double omega_proxy = 0.0;
  bool had_zero_tie = false;  // a probe hit S = 0 exactly (local victims only)
};

// Probes sgn(S(f(base + delta u_i))) for B sampled unit directions and folds
// the answers into raw_low. Issues exactly B oracle queries.
GradientEstimate estimate_raw(const Projection& p, DifferenceOracle& oracle,
                              const EstimatorConfig& cfg, Rng& rng);

// Same, but with caller-supplied directions (reference comparisons and tests).
GradientEstimate estimate_raw_with_directions(const Projection& p, DifferenceOracle& oracle,
                                              const EstimatorConfig& cfg,
                                              std::vector<Vec> directions);

// precise: lifted = J raw_low. approximate: lifted = (1/B) sum_i s_i
// (f(base + u_i) - x_b), reusing the recorded samples and signs -- no new
// oracle queries either way.
void lift_estimate(const Projection& p, GradientEstimate& e, const EstimatorConfig& cfg);

// Fraction of samples whose recorded sign disagrees with the sign of
// <lifted, f(base + u_i) - x_b>; ties on the inner product count as +1.
double omega_proxy(const Projection& p, const GradientEstimate& e);

// cos(lifted, grad S(x_b)); 0 when the lift is the zero vector.
double cosine_to_truth(const GradientEstimate& e, const GroundTruth& truth, const Vec& x_b);

// estimate_raw + lift_estimate + omega_proxy in one call.
GradientEstimate estimate_gradient(const Projection& p, DifferenceOracle& oracle,
                                   const EstimatorConfig& cfg, Rng& rng);

}  // namespace attacklab
