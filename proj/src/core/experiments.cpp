#include "experiments.hpp"

#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>

#include "errors.hpp"
#include "rng.hpp"

namespace attacklab {

using nlohmann::json;

void write_file_atomic(const std::string& path, const std::string& content) {
  const std::size_t slash = path.find_last_of('/');
  const std::string dir = slash == std::string::npos ? "." : path.substr(0, slash);
  std::string tmp = dir + "/.attacklab_tmp_XXXXXX";
  std::vector<char> buf(tmp.begin(), tmp.end());
  buf.push_back('\0');
  const int fd = ::mkstemp(buf.data());
  if (fd < 0)
    fail(ErrorKind::io, "cannot create temp file near '" + path + "': " + std::strerror(errno));
  const std::string tmp_path(buf.data());
  std::size_t off = 0;
  while (off < content.size()) {
    const ssize_t n = ::write(fd, content.data() + off, content.size() - off);
    if (n < 0) {
      if (errno == EINTR) continue;
      const std::string msg = std::strerror(errno);
      ::close(fd);
      ::unlink(tmp_path.c_str());
      fail(ErrorKind::io, "write to '" + tmp_path + "' failed: " + msg);
    }
    off += static_cast<std::size_t>(n);
  }
  ::close(fd);
  if (::rename(tmp_path.c_str(), path.c_str()) != 0) {
    const std::string msg = std::strerror(errno);
    ::unlink(tmp_path.c_str());
    fail(ErrorKind::io, "rename to '" + path + "' failed: " + msg);
  }
}

SmoothnessProfile profile_from_json(const json& j) {
  if (!j.is_object()) fail(ErrorKind::config, "profile: need a JSON object");
  SmoothnessProfile p;
  auto num = [&](const char* key, double fallback) {
    if (!j.contains(key)) return fallback;
    if (!j[key].is_number()) fail(ErrorKind::config, std::string("profile: '") + key + "' must be a number");
    return j[key].get<double>();
  };
  auto unsigned_of = [&](const char* key, std::size_t fallback) {
    if (!j.contains(key)) return fallback;
    const json& v = j[key];
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
      fail(ErrorKind::config, std::string("profile: '") + key + "' must be unsigned");
    return v.get<std::size_t>();
  };
  p.L_f = num("L_f", p.L_f);
  p.l_f = num("l_f", p.l_f);
  p.beta_f = num("beta_f", p.beta_f);
  p.L_S = num("L_S", p.L_S);
  p.beta_S = num("beta_S", p.beta_S);
  p.delta = num("delta", p.delta);
  p.n = unsigned_of("n", p.n);
  p.B = unsigned_of("B", p.B);
  p.proj_align = num("proj_align", p.proj_align);
  p.grad_norm = num("grad_norm", p.grad_norm);
  return p;
}

json profile_to_json(const SmoothnessProfile& p) {
  return json{{"L_f", p.L_f},       {"l_f", p.l_f},
              {"beta_f", p.beta_f}, {"L_S", p.L_S},
              {"beta_S", p.beta_S}, {"delta", p.delta},
              {"n", p.n},           {"B", p.B},
              {"proj_align", p.proj_align}, {"grad_norm", p.grad_norm}};
}

SmoothnessProfile load_profile(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::io, "cannot open profile '" + path + "'");
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) fail(ErrorKind::config, "profile: '" + path + "' is not valid JSON");
  return profile_from_json(j);
}

// ------------------------------------------------------------- attacks ----

namespace {

Vec gaussian_point(std::size_t m, double scale, Rng& rng) {
  Vec x(m);
  for (std::size_t i = 0; i < m; ++i) x[i] = scale * rng.next_gaussian();
  return x;
}

Vec find_with_sign(DifferenceOracle& oracle, int want, double scale, std::size_t max_attempts,
                   Rng& rng) {
  for (std::size_t a = 0; a < max_attempts; ++a) {
    Vec x = gaussian_point(oracle.dim(), scale, rng);
    if (oracle.query_sign(x) == want) return x;
  }
  fail(ErrorKind::precondition,
       std::string("pair sampling found no ") + (want > 0 ? "adversarial" : "benign") +
           " point; is the victim one-sided at this scale?");
}

}  // namespace

std::vector<std::pair<Vec, Vec>> sample_attack_pairs(DifferenceOracle& oracle,
                                                     const PairSampleConfig& cfg) {
  if (cfg.pairs < 1) fail(ErrorKind::invalid_argument, "pair sampling: need at least one pair");
  if (!(cfg.scale > 0.0)) fail(ErrorKind::invalid_argument, "pair sampling: scale must be > 0");
  Rng root(cfg.seed);
  std::vector<std::pair<Vec, Vec>> pairs;
  pairs.reserve(cfg.pairs);
  for (std::size_t i = 0; i < cfg.pairs; ++i) {
    Rng pair_rng = root.child(i);
    Vec src = find_with_sign(oracle, +1, cfg.scale, cfg.max_attempts, pair_rng);
    Vec tgt = find_with_sign(oracle, -1, cfg.scale, cfg.max_attempts, pair_rng);
    pairs.emplace_back(std::move(src), std::move(tgt));
  }
  return pairs;
}

AttackPairsOutcome run_attack_pairs(DifferenceOracle& oracle, const GroundTruth* truth,
                                    const AttackPairsConfig& cfg) {
  if (projection_needs_whitebox(cfg.projection))
    fail(ErrorKind::config,
         "projection '" + cfg.projection.kind + "' needs gradient access; not usable in the attack loop");
  validate_attack_config(cfg.attack);

  PairSampleConfig ps;
  ps.pairs = cfg.pairs;
  ps.scale = cfg.pair_scale;
  ps.seed = cfg.attack.seed;
  const auto pairs = sample_attack_pairs(oracle, ps);

  const ProjectionSpec spec = cfg.projection;
  ProjectionFactory factory = [spec, truth](const Vec& x_b) {
    return make_projection(spec, x_b, truth);
  };

  Rng seed_rng = Rng(cfg.attack.seed).child(0xa77ac4);
  AttackPairsOutcome out;
  out.outcomes.reserve(cfg.pairs);
  for (std::size_t i = 0; i < cfg.pairs; ++i) {
    PairOutcome po;
    po.index = i;
    po.seed = seed_rng.child(i).next_u64();
    AttackConfig acfg = cfg.attack;
    acfg.seed = po.seed;
    try {
      po.result = run_attack(oracle, factory, pairs[i].first, pairs[i].second, acfg);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::precondition) throw;
      po.skipped = true;
      po.skip_reason = e.what();
      ++out.skipped;
    }
    out.outcomes.push_back(std::move(po));
  }
  return out;
}

namespace {

double mse_at(const AttackTrace& trace, std::uint64_t q) {
  double value = trace.rows.empty() ? 0.0 : trace.rows.front().mse;
  for (const TraceRow& row : trace.rows) {
    if (row.queries > q) break;
    value = row.mse;
  }
  return value;
}

double median(std::vector<double> xs) {
  if (xs.empty()) return 0.0;
  std::sort(xs.begin(), xs.end());
  const std::size_t h = xs.size() / 2;
  return xs.size() % 2 ? xs[h] : 0.5 * (xs[h - 1] + xs[h]);
}

double mean(const std::vector<double>& xs) {
  if (xs.empty()) return 0.0;
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

}  // namespace

json attack_summary_json(const AttackPairsOutcome& out, const json& resolved_config,
                         const std::vector<std::string>& trace_names, std::uint64_t budget) {
  json pairs = json::array();
  std::vector<double> final_mses;
  for (const PairOutcome& po : out.outcomes) {
    json p;
    p["index"] = po.index;
    p["seed"] = po.seed;
    p["skipped"] = po.skipped;
    if (po.skipped) {
      p["skip_reason"] = po.skip_reason;
    } else {
      p["queries"] = po.result.queries_spent;
      p["iterations"] = po.result.iterations;
      p["final_l2"] = po.result.final_l2;
      p["final_mse"] = po.result.final_mse;
      p["success"] = po.result.trace.success;
      p["budget_exhausted"] = po.result.budget_exhausted;
      if (po.index < trace_names.size()) p["trace"] = trace_names[po.index];
      final_mses.push_back(po.result.final_mse);
    }
    pairs.push_back(std::move(p));
  }

  json checkpoints = json::array();
  for (int k = 1; k <= 10; ++k) {
    const std::uint64_t q = budget * static_cast<std::uint64_t>(k) / 10;
    std::vector<double> at;
    for (const PairOutcome& po : out.outcomes)
      if (!po.skipped) at.push_back(mse_at(po.result.trace, q));
    checkpoints.push_back(
        {{"queries", q}, {"median_mse", median(at)}, {"mean_mse", mean(at)}});
  }

  json j;
  j["config"] = resolved_config;
  j["pairs"] = std::move(pairs);
  j["aggregate"] = {{"attempted", out.outcomes.size()},
                    {"completed", out.outcomes.size() - out.skipped},
                    {"skipped", out.skipped},
                    {"median_final_mse", median(final_mses)},
                    {"mean_final_mse", mean(final_mses)},
                    {"checkpoints", std::move(checkpoints)}};
  return j;
}

// -------------------------------------------------------------- sweeps ----

EstimateSweep run_estimate_sweep(
    const GroundTruth& truth, DifferenceOracle& oracle,
    const std::function<std::unique_ptr<Projection>(const Vec&)>& projection_at,
    const std::function<Vec(Rng&)>& base_point, const EstimateSweepConfig& cfg, Rng& rng) {
  if (cfg.B_list.empty()) fail(ErrorKind::invalid_argument, "estimate sweep: empty B list");
  if (cfg.trials < 1) fail(ErrorKind::invalid_argument, "estimate sweep: need trials >= 1");
  if (!projection_at || !base_point)
    fail(ErrorKind::invalid_argument, "estimate sweep: projection and base point samplers required");

  EstimateSweep sweep;
  for (std::size_t bi = 0; bi < cfg.B_list.size(); ++bi) {
    EstimatorConfig est = cfg.estimator;
    est.B = cfg.B_list[bi];
    Rng b_rng = rng.child(bi);
    std::vector<double> cosines, proxies;
    cosines.reserve(cfg.trials);
    for (std::size_t trial = 0; trial < cfg.trials; ++trial) {
      Rng trial_rng = b_rng.child(trial);
      const Vec x_b = base_point(trial_rng);
      std::unique_ptr<Projection> proj = projection_at(x_b);
      GradientEstimate e = estimate_gradient(*proj, oracle, est, trial_rng);
      const double c = cosine_to_truth(e, truth, x_b);
      cosines.push_back(c);
      proxies.push_back(e.omega_proxy);
      sweep.scatter.push_back({est.B, e.omega_proxy, c});
    }
    EstimateSweepRow row;
    row.B = est.B;
    row.mean_cos = mean(cosines);
    row.mean_omega_proxy = mean(proxies);
    if (cfg.trials > 1) {
      double ss = 0.0;
      for (double c : cosines) ss += (c - row.mean_cos) * (c - row.mean_cos);
      row.stderr_cos = std::sqrt(ss / static_cast<double>(cfg.trials - 1) /
                                 static_cast<double>(cfg.trials));
    }
    sweep.rows.push_back(row);
  }
  return sweep;
}

namespace {

std::string config_comment_lines(const json& resolved_config) {
  if (!resolved_config.is_object() || resolved_config.empty()) return "";
  std::string out;
  const json flat = resolved_config.flatten();
  for (const auto& [key, value] : flat.items())
    out += "# " + key + " = " + value.dump() + "\n";
  return out;
}

std::string g17(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

}  // namespace

std::string estimate_sweep_csv(const EstimateSweep& sweep, const json& resolved_config) {
  std::string out = config_comment_lines(resolved_config);
  out += "B,mean_cos,stderr,mean_omega_proxy\n";
  for (const EstimateSweepRow& r : sweep.rows)
    out += std::to_string(r.B) + "," + g17(r.mean_cos) + "," + g17(r.stderr_cos) + "," +
           g17(r.mean_omega_proxy) + "\n";
  return out;
}

std::string estimate_scatter_csv(const EstimateSweep& sweep, const json& resolved_config) {
  std::string out = config_comment_lines(resolved_config);
  out += "B,omega_proxy,cos\n";
  for (const ScatterPoint& p : sweep.scatter)
    out += std::to_string(p.B) + "," + g17(p.omega_proxy) + "," + g17(p.cos) + "\n";
  return out;
}

std::function<Vec(Rng&)> boundary_point_sampler(DifferenceOracle& oracle, double scale,
                                                double theta) {
  if (!(scale > 0.0)) fail(ErrorKind::invalid_argument, "boundary sampler: scale must be > 0");
  return [&oracle, scale, theta](Rng& rng) {
    Vec src = find_with_sign(oracle, +1, scale, 100000, rng);
    Vec tgt = find_with_sign(oracle, -1, scale, 100000, rng);
    return binary_search_to_boundary(oracle, src, tgt, theta, /*check_endpoints=*/false).point;
  };
}

// ------------------------------------------------------ theory reports ----

json report_lemma4(std::size_t n_max) {
  const Lemma4Report r = verify_lemma4(n_max);
  return json{{"check", "lemma4_constants"},
              {"parameters", {{"n_max", r.n_max}}},
              {"statistic",
               {{"min_margin_above_2_over_pi", r.min_margin_above},
                {"min_margin_below_1", r.min_margin_below},
                {"min_margin_monotone", r.min_margin_mono},
                {"c2_error", r.c2_error}}},
              {"bounds", {{"margin", 1e-12}}},
              {"pass", r.pass}};
}

json report_lemma1(std::size_t n, std::size_t samples, std::uint64_t seed) {
  Rng rng(seed);
  const Lemma1Report r = verify_lemma1(n, samples, rng);
  return json{{"check", "lemma1_distribution"},
              {"parameters", {{"n", r.n}, {"samples", r.samples}, {"seed", seed}}},
              {"statistic", {{"ks", r.ks}}},
              {"bounds", {{"critical_1pct", r.critical}}},
              {"pass", r.pass}};
}

json report_pa(const std::vector<std::size_t>& ns) {
  if (ns.empty()) fail(ErrorKind::invalid_argument, "pa report: need at least one n");
  double max_integral_err = 0.0;
  double max_symmetry_err = 0.0;
  double max_cdf_anchor_err = 0.0;
  for (const std::size_t n : ns) {
    // Total mass via the CDF at the right endpoint.
    max_integral_err = std::max(max_integral_err, std::abs(pa_cdf(n, 1.0) - 1.0));
    max_cdf_anchor_err = std::max({max_cdf_anchor_err, std::abs(pa_cdf(n, -1.0)),
                                   std::abs(pa_cdf(n, 0.0) - 0.5)});
    for (double x : {0.1, 0.35, 0.62, 0.9})
      max_symmetry_err = std::max(max_symmetry_err, std::abs(pa_pdf(n, x) - pa_pdf(n, -x)));
  }
  const bool pass =
      max_integral_err < 1e-8 && max_symmetry_err == 0.0 && max_cdf_anchor_err < 1e-9;
  return json{{"check", "pa_distribution"},
              {"parameters", {{"n", ns}}},
              {"statistic",
               {{"max_integral_error", max_integral_err},
                {"max_symmetry_error", max_symmetry_err},
                {"max_cdf_anchor_error", max_cdf_anchor_err}}},
              {"bounds", {{"integral_tol", 1e-8}, {"anchor_tol", 1e-9}}},
              {"pass", pass}};
}

json report_bounds(const SmoothnessProfile& p, double omega_override) {
  json j;
  j["check"] = "theorem1_bounds";
  json params = profile_to_json(p);
  double omega;
  if (omega_override >= 0.0) {
    omega = omega_override;
    params["omega_override"] = omega_override;
  } else {
    omega = compute_omega(p);
  }
  j["parameters"] = std::move(params);
  j["statistic"] = {{"omega", omega}};
  try {
    const CosineBounds b = theorem1_bounds(p, omega);
    j["bounds"] = {{"lower", b.lower}, {"upper", b.upper}, {"relaxed_lower", b.relaxed_lower}};
    j["pass"] = b.lower <= b.upper;
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::precondition) throw;
    j["bounds"] = nullptr;
    j["pass"] = false;
    j["reason"] = "assumption_violated";
    j["detail"] = e.what();
  }
  return j;
}

json report_sandwich(const SandwichReport& rep, const json& parameters) {
  json j;
  j["check"] = "theorem1_sandwich";
  j["parameters"] = parameters;
  j["statistic"] = {{"trials", rep.trials},
                    {"mean_cos", rep.mean_cos},
                    {"stderr_cos", rep.stderr_cos},
                    {"mean_proj_align", rep.mean_proj_align},
                    {"mean_grad_norm", rep.mean_grad_norm},
                    {"omega", rep.omega}};
  if (rep.skipped) {
    j["bounds"] = nullptr;
    j["pass"] = false;
    j["reason"] = "assumption_violated";
    j["detail"] = rep.skip_reason;
  } else {
    j["bounds"] = {{"lower", rep.bounds.lower},
                   {"upper", rep.bounds.upper},
                   {"relaxed_lower", rep.bounds.relaxed_lower},
                   {"tolerance", 3.0 * rep.stderr_cos}};
    j["pass"] = rep.pass;
  }
  return j;
}

json report_qcfit(const QueryComplexityFit& fit, double min_r2, const json& parameters) {
  json per_b = json::array();
  for (std::size_t i = 0; i < fit.B_list.size(); ++i)
    per_b.push_back({{"B", fit.B_list[i]},
                     {"mean_cos", fit.mean_cos[i]},
                     {"stderr", fit.stderr_cos[i]}});
  return json{{"check", "corollary2_scaling"},
              {"parameters", parameters},
              {"statistic", {{"slope", fit.slope}, {"r_squared", fit.r_squared}, {"per_B", per_b}}},
              {"bounds", {{"min_r_squared", min_r2}}},
              {"pass", fit.r_squared > min_r2}};
}

}  // namespace attacklab
