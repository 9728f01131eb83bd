#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "attack.hpp"
#include "estimator.hpp"
#include "projections.hpp"
#include "theory.hpp"
#include "vec.hpp"
#include "victims.hpp"

namespace attacklab {

// Writes content to path via a temp file in the same directory plus rename,
// so readers never observe a half-written artifact.
void write_file_atomic(const std::string& path, const std::string& content);

SmoothnessProfile profile_from_json(const nlohmann::json& j);
nlohmann::json profile_to_json(const SmoothnessProfile& p);
SmoothnessProfile load_profile(const std::string& path);

// ------------------------------------------------------------- attacks ----

struct PairSampleConfig {
  std::size_t pairs = 1;
  double scale = 1.0;  // standard deviation of the Gaussian point cloud
  std::uint64_t seed = 0;
  std::size_t max_attempts = 100000;  // per class per pair
};

// Rejection-samples (adversarial source, benign target) pairs from an
// isotropic Gaussian. The sampling queries do not count against any attack
// budget; pairs play the role of a dataset.
std::vector<std::pair<Vec, Vec>> sample_attack_pairs(DifferenceOracle& oracle,
                                                     const PairSampleConfig& cfg);

struct AttackPairsConfig {
  AttackConfig attack;  // attack.seed is the master seed; per-pair seeds derive from it
  ProjectionSpec projection;
  std::size_t pairs = 1;
  double pair_scale = 1.0;
};

struct PairOutcome {
  std::size_t index = 0;
  std::uint64_t seed = 0;  // derived attack seed for this pair
  AttackResult result;
  bool skipped = false;
  std::string skip_reason;
};

struct AttackPairsOutcome {
  std::vector<PairOutcome> outcomes;
  std::size_t skipped = 0;
};

// Samples pairs and runs one attack per pair. Precondition violations on a
// pair mark it skipped instead of aborting the batch.
AttackPairsOutcome run_attack_pairs(DifferenceOracle& oracle, const GroundTruth* truth,
                                    const AttackPairsConfig& cfg);

// Per-pair stats plus mean/median MSE at ten evenly spaced query checkpoints.
// resolved_config is echoed verbatim; trace_names[i] labels pair i's CSV.
nlohmann::json attack_summary_json(const AttackPairsOutcome& out,
                                   const nlohmann::json& resolved_config,
                                   const std::vector<std::string>& trace_names,
                                   std::uint64_t budget);

// -------------------------------------------------------------- sweeps ----

struct EstimateSweepConfig {
  std::vector<std::size_t> B_list;
  std::size_t trials = 200;
  EstimatorConfig estimator;  // delta and modes; B comes from B_list
  std::uint64_t seed = 0;
};

struct EstimateSweepRow {
  std::size_t B = 0;
  double mean_cos = 0.0;
  double stderr_cos = 0.0;
  double mean_omega_proxy = 0.0;
};

struct ScatterPoint {
  std::size_t B = 0;
  double omega_proxy = 0.0;
  double cos = 0.0;
};

struct EstimateSweep {
  std::vector<EstimateSweepRow> rows;
  std::vector<ScatterPoint> scatter;  // one point per trial, B-major order
};

EstimateSweep run_estimate_sweep(
    const GroundTruth& truth, DifferenceOracle& oracle,
    const std::function<std::unique_ptr<Projection>(const Vec&)>& projection_at,
    const std::function<Vec(Rng&)>& base_point, const EstimateSweepConfig& cfg, Rng& rng);

// CSV bodies; config_echo lines are emitted as leading '#' comments.
std::string estimate_sweep_csv(const EstimateSweep& sweep, const nlohmann::json& resolved_config);
std::string estimate_scatter_csv(const EstimateSweep& sweep, const nlohmann::json& resolved_config);

// Draws a boundary point: rejection-samples an (adversarial, benign) Gaussian
// pair and bisects the segment. Useful as the base_point argument above.
std::function<Vec(Rng&)> boundary_point_sampler(DifferenceOracle& oracle, double scale,
                                                double theta);

// ------------------------------------------------------ theory reports ----
// All reports share the shape {check, parameters, statistic, bounds, pass}.

nlohmann::json report_lemma4(std::size_t n_max);
nlohmann::json report_lemma1(std::size_t n, std::size_t samples, std::uint64_t seed);
nlohmann::json report_pa(const std::vector<std::size_t>& ns);
// omega_override < 0 means "derive omega from the profile".
nlohmann::json report_bounds(const SmoothnessProfile& p, double omega_override);
nlohmann::json report_sandwich(const SandwichReport& rep, const nlohmann::json& parameters);
nlohmann::json report_qcfit(const QueryComplexityFit& fit, double min_r2,
                            const nlohmann::json& parameters);

}  // namespace attacklab
