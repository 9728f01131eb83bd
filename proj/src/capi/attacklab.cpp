#include "attacklab.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include <json.hpp>

#include "core/attack.hpp"
#include "core/errors.hpp"
#include "core/estimator.hpp"
#include "core/experiments.hpp"
#include "core/projections.hpp"
#include "core/rng.hpp"
#include "core/theory.hpp"
#include "core/vec.hpp"
#include "core/victim_spec.hpp"
#include "core/victims.hpp"
#include "core/wire.hpp"

using namespace attacklab;
using nlohmann::json;

extern "C" {
struct al_victim {
  std::unique_ptr<DifferenceOracle> oracle;
  std::unique_ptr<GroundTruth> truth;
};

struct al_server {
  std::unique_ptr<VictimServer> server;
};
}

namespace {

thread_local std::string g_last_error;

void set_error(std::string msg) { g_last_error = std::move(msg); }

al_status status_of(ErrorKind k) {
  switch (k) {
    case ErrorKind::config:
      return AL_E_CONFIG;
    case ErrorKind::transport:
      return AL_E_TRANSPORT;
    case ErrorKind::precondition:
      return AL_E_PRECONDITION;
    case ErrorKind::io:
      return AL_E_IO;
    case ErrorKind::invalid_argument:
      return AL_E_INVALID;
  }
  return AL_E_INTERNAL;
}

template <typename F>
al_status guarded(F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    set_error(e.what());
    return status_of(e.kind());
  } catch (const std::exception& e) {
    set_error(e.what());
    return AL_E_INTERNAL;
  } catch (...) {
    set_error("unknown failure");
    return AL_E_INTERNAL;
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) fail(ErrorKind::io, "out of memory copying a result string");
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

[[noreturn]] void bad_config(const std::string& what) { fail(ErrorKind::config, what); }

void config_check(bool ok, const std::string& what) {
  if (!ok) bad_config(what);
}

json parse_config(const char* text) {
  if (!text) bad_config("config: missing JSON");
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) bad_config("config: not valid JSON");
  if (!j.is_object()) bad_config("config: need a JSON object");
  return j;
}

// Typed key access over a config object; done() rejects keys nobody read, so
// misspelled options fail loudly instead of silently using a default.
class ConfigReader {
 public:
  ConfigReader(const json& j, std::string what) : j_(j), what_(std::move(what)) {}

  bool has(const char* key) {
    seen_.push_back(key);
    return j_.contains(key);
  }

  std::uint64_t u64(const char* key, std::uint64_t fallback) {
    if (!has(key)) return fallback;
    const json& v = j_[key];
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
      bad_config(what_ + ": '" + key + "' must be a nonnegative integer");
    return v.get<std::uint64_t>();
  }

  std::uint64_t u64_required(const char* key) {
    if (!j_.contains(key)) bad_config(what_ + ": missing required key '" + key + "'");
    return u64(key, 0);
  }

  std::size_t size(const char* key, std::size_t fallback) {
    return static_cast<std::size_t>(u64(key, fallback));
  }

  double num(const char* key, double fallback) {
    if (!has(key)) return fallback;
    if (!j_[key].is_number()) bad_config(what_ + ": '" + key + "' must be a number");
    return j_[key].get<double>();
  }

  bool boolean(const char* key, bool fallback) {
    if (!has(key)) return fallback;
    if (!j_[key].is_boolean()) bad_config(what_ + ": '" + key + "' must be a boolean");
    return j_[key].get<bool>();
  }

  std::string str(const char* key, std::string fallback) {
    if (!has(key)) return fallback;
    if (!j_[key].is_string()) bad_config(what_ + ": '" + key + "' must be a string");
    return j_[key].get<std::string>();
  }

  const json& object_required(const char* key) {
    if (!has(key) || !j_[key].is_object())
      bad_config(what_ + ": '" + key + "' must be a JSON object");
    return j_[key];
  }

  const json* object_optional(const char* key) {
    if (!has(key)) return nullptr;
    if (!j_[key].is_object()) bad_config(what_ + ": '" + key + "' must be a JSON object");
    return &j_[key];
  }

  std::vector<std::size_t> size_list_required(const char* key) {
    if (!has(key) || !j_[key].is_array() || j_[key].empty())
      bad_config(what_ + ": '" + key + "' must be a non-empty array of integers");
    std::vector<std::size_t> out;
    for (const json& v : j_[key]) {
      if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() > 0))
        bad_config(what_ + ": entries of '" + key + "' must be positive integers");
      out.push_back(v.get<std::size_t>());
    }
    return out;
  }

  void done() const {
    for (const auto& [key, value] : j_.items())
      if (std::find(seen_.begin(), seen_.end(), key) == seen_.end())
        bad_config(what_ + ": unknown key '" + key + "'");
  }

 private:
  const json& j_;
  std::string what_;
  std::vector<std::string> seen_;
};

SamplingMode sampling_of(const std::string& s) {
  if (s == "frame") return SamplingMode::orthonormal_frame;
  if (s == "gaussian") return SamplingMode::normalized_gaussian;
  bad_config("sampling must be 'frame' or 'gaussian', got '" + s + "'");
}

LiftMode lift_of(const std::string& s) {
  if (s == "precise") return LiftMode::precise;
  if (s == "approximate") return LiftMode::approximate;
  bad_config("lift must be 'precise' or 'approximate', got '" + s + "'");
}

al_victim* need_victim(al_victim* v, const char* what) {
  if (!v || !v->oracle) fail(ErrorKind::invalid_argument, std::string(what) + ": null victim");
  return v;
}

const GroundTruth& need_truth(const al_victim* v, const char* what) {
  if (!v->truth)
    bad_config(std::string(what) + " needs a local victim (remote victims expose no ground truth)");
  return *v->truth;
}

json typed_scalar(const std::string& v) {
  if (!v.empty() && v.find_first_not_of("0123456789") == std::string::npos) {
    errno = 0;
    char* end = nullptr;
    const unsigned long long u = std::strtoull(v.c_str(), &end, 10);
    if (errno == 0 && end && *end == '\0') return json(static_cast<std::uint64_t>(u));
  }
  char* end = nullptr;
  const double d = std::strtod(v.c_str(), &end);
  if (end && end != v.c_str() && *end == '\0') return json(d);
  return json(v);
}

json projection_arg_json(const std::string& raw) {
  std::string text = raw;
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.erase(0, 1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\n'))
    text.pop_back();
  if (text.empty()) bad_config("projection: empty spec");
  if (text[0] == '{') {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) bad_config("projection: inline JSON does not parse");
    return j;
  }
  {
    std::ifstream in(text);
    if (in) {
      json j = json::parse(in, nullptr, false);
      if (j.is_discarded()) bad_config("projection: file '" + text + "' is not valid JSON");
      return j;
    }
  }
  const bool looks_like_path =
      text.find('/') != std::string::npos ||
      (text.size() > 5 && text.compare(text.size() - 5, 5, ".json") == 0);
  if (looks_like_path) fail(ErrorKind::io, "cannot open projection spec '" + text + "'");

  json j;
  const std::size_t colon = text.find(':');
  j["kind"] = text.substr(0, colon);
  if (colon != std::string::npos) {
    std::string rest = text.substr(colon + 1);
    std::size_t pos = 0;
    while (pos <= rest.size()) {
      std::size_t comma = rest.find(',', pos);
      if (comma == std::string::npos) comma = rest.size();
      const std::string piece = rest.substr(pos, comma - pos);
      const std::size_t eq = piece.find('=');
      if (eq == std::string::npos || eq == 0)
        bad_config("projection: expected key=value, got '" + piece + "'");
      j[piece.substr(0, eq)] = typed_scalar(piece.substr(eq + 1));
      pos = comma + 1;
    }
  }
  return j;
}

std::string pretty(const json& j) { return j.dump(2) + "\n"; }

// ------------------------------------------------------ theory command ----

json theory_cn(const json& cfg) {
  ConfigReader r(cfg, "cn config");
  const std::size_t n_max = r.size("n_max", 200);
  r.done();
  config_check(n_max >= 4, "cn config: n_max must be >= 4");
  return report_lemma4(n_max);
}

json theory_lemma1(const json& cfg) {
  ConfigReader r(cfg, "lemma1 config");
  const std::size_t n = r.size("n", 16);
  const std::size_t samples = r.size("samples", 100000);
  const std::uint64_t seed = r.u64("seed", 0);
  r.done();
  config_check(n >= 2, "lemma1 config: n must be >= 2");
  config_check(samples >= 10000, "lemma1 config: need at least 10000 samples");
  return report_lemma1(n, samples, seed);
}

json theory_pa(const json& cfg) {
  ConfigReader r(cfg, "pa config");
  std::vector<std::size_t> ns = {2, 3, 16, 64};
  if (cfg.contains("n")) ns = r.size_list_required("n");
  r.done();
  for (std::size_t n : ns) config_check(n >= 2, "pa config: every n must be >= 2");
  return report_pa(ns);
}

json theory_bounds(const json& cfg) {
  ConfigReader r(cfg, "bounds config");
  const SmoothnessProfile p = profile_from_json(r.object_required("profile"));
  const double omega = r.num("omega", -1.0);
  r.done();
  return report_bounds(p, omega);
}

struct MeasurementSetup {
  ProjectionSpec spec;
  std::function<std::unique_ptr<Projection>(const Vec&)> projection_at;
  std::function<Vec(Rng&)> base_point;
  std::unique_ptr<Projection> probe;  // bound at the zero point, for n and constants
};

// Shared victim/projection wiring for the measurement-driven commands.
MeasurementSetup measurement_setup(al_victim* victim, const json& projection_json, double scale,
                                   double boundary_theta) {
  MeasurementSetup s;
  s.spec = projection_spec_from_json(projection_json);
  const GroundTruth* truth = victim->truth.get();
  s.probe = make_projection(s.spec, Vec(victim->oracle->dim()), truth);
  const ProjectionSpec spec = s.spec;
  s.projection_at = [spec, truth](const Vec& x_b) { return make_projection(spec, x_b, truth); };
  s.base_point = boundary_point_sampler(*victim->oracle, scale, boundary_theta);
  return s;
}

void check_frame_capacity(const EstimatorConfig& est, std::size_t max_B, std::size_t n) {
  if (est.sampling_mode == SamplingMode::orthonormal_frame && max_B > n)
    fail(ErrorKind::precondition,
         "B = " + std::to_string(max_B) + " exceeds the latent dimension n = " +
             std::to_string(n) + "; an orthonormal frame has only n columns");
}

json theory_sandwich(al_victim* victim, const json& cfg) {
  ConfigReader r(cfg, "sandwich config");
  const json projection_json = r.object_required("projection");
  SandwichOptions opt;
  opt.estimator.B = r.size("B", 0);
  opt.estimator.delta = r.num("delta", 1e-3);
  const std::string sampling = r.str("sampling", "frame");
  const std::string lift = r.str("lift", "precise");
  opt.estimator.sampling_mode = sampling_of(sampling);
  opt.estimator.lift_mode = lift_of(lift);
  opt.trials = r.size("trials", 1000);
  const std::uint64_t seed = r.u64("seed", 0);
  const double scale = r.num("scale", 1.0);
  const double boundary_theta = r.num("boundary_theta", 1e-6);
  opt.measure_S_constants = r.boolean("measure_constants", true);
  opt.constants_safety = r.num("constants_safety", 1.5);
  opt.omega_override = r.num("omega", -1.0);
  const json* profile_json = r.object_optional("profile");
  r.done();

  config_check(opt.estimator.B >= 1, "sandwich config: B must be >= 1");
  config_check(opt.estimator.delta > 0.0, "sandwich config: delta must be > 0");
  config_check(opt.trials >= 500, "sandwich config: need at least 500 trials");
  config_check(scale > 0.0, "sandwich config: scale must be > 0");
  config_check(boundary_theta > 0.0 && boundary_theta < 1.0,
               "sandwich config: boundary_theta must lie in (0, 1)");
  config_check(opt.constants_safety >= 1.0,
               "sandwich config: constants_safety must be >= 1");

  const GroundTruth& truth = need_truth(victim, "sandwich");
  MeasurementSetup setup =
      measurement_setup(victim, projection_json, scale, boundary_theta);
  check_frame_capacity(opt.estimator, opt.estimator.B, setup.probe->n());

  if (profile_json) {
    opt.profile_template = profile_from_json(*profile_json);
  } else if (setup.probe->has_declared_constants()) {
    const Projection::DeclaredConstants dc = setup.probe->declared_constants();
    opt.profile_template.L_f = dc.L_f;
    opt.profile_template.l_f = dc.l_f;
    opt.profile_template.beta_f = dc.beta_f;
  }

  json resolved = {{"command", "theory sandwich"},
                   {"projection", projection_spec_to_json(setup.spec)},
                   {"B", opt.estimator.B},
                   {"delta", opt.estimator.delta},
                   {"sampling", sampling},
                   {"lift", lift},
                   {"trials", opt.trials},
                   {"seed", seed},
                   {"scale", scale},
                   {"boundary_theta", boundary_theta},
                   {"measure_constants", opt.measure_S_constants},
                   {"constants_safety", opt.constants_safety},
                   {"profile", profile_to_json(opt.profile_template)}};
  if (opt.omega_override >= 0.0) resolved["omega"] = opt.omega_override;

  Rng rng(seed);
  SandwichReport rep = verify_theorem1_sandwich(truth, *victim->oracle, setup.projection_at,
                                                setup.base_point, opt, rng);
  return report_sandwich(rep, resolved);
}

json theory_qcfit(al_victim* victim, const json& cfg) {
  ConfigReader r(cfg, "qcfit config");
  const json projection_json = r.object_required("projection");
  const std::vector<std::size_t> B_list = r.size_list_required("B_list");
  EstimatorConfig est;
  est.delta = r.num("delta", 1e-3);
  const std::string sampling = r.str("sampling", "frame");
  const std::string lift = r.str("lift", "precise");
  est.sampling_mode = sampling_of(sampling);
  est.lift_mode = lift_of(lift);
  const std::size_t trials = r.size("trials", 200);
  const std::uint64_t seed = r.u64("seed", 0);
  const double scale = r.num("scale", 1.0);
  const double boundary_theta = r.num("boundary_theta", 1e-6);
  const double min_r2 = r.num("min_r2", 0.95);
  r.done();

  config_check(est.delta > 0.0, "qcfit config: delta must be > 0");
  config_check(trials >= 200, "qcfit config: need at least 200 trials");
  config_check(scale > 0.0, "qcfit config: scale must be > 0");
  config_check(boundary_theta > 0.0 && boundary_theta < 1.0,
               "qcfit config: boundary_theta must lie in (0, 1)");
  config_check(min_r2 > 0.0 && min_r2 <= 1.0, "qcfit config: min_r2 must lie in (0, 1]");

  const GroundTruth& truth = need_truth(victim, "qcfit");
  MeasurementSetup setup =
      measurement_setup(victim, projection_json, scale, boundary_theta);
  check_frame_capacity(est, *std::max_element(B_list.begin(), B_list.end()), setup.probe->n());

  const json resolved = {{"command", "theory qcfit"},
                         {"projection", projection_spec_to_json(setup.spec)},
                         {"B_list", B_list},
                         {"delta", est.delta},
                         {"sampling", sampling},
                         {"lift", lift},
                         {"trials", trials},
                         {"seed", seed},
                         {"scale", scale},
                         {"boundary_theta", boundary_theta},
                         {"min_r2", min_r2}};

  Rng rng(seed);
  QueryComplexityFit fit = fit_query_complexity(truth, *victim->oracle, setup.projection_at,
                                                setup.base_point, est, B_list, trials, rng);
  return report_qcfit(fit, min_r2, resolved);
}

}  // namespace

extern "C" {

const char* al_version(void) { return "0.1.0"; }

const char* al_last_error(void) { return g_last_error.c_str(); }

void al_string_free(char* s) { std::free(s); }

al_status al_write_file(const char* path, const char* content) {
  return guarded([&]() -> al_status {
    if (!path || !content) fail(ErrorKind::invalid_argument, "write: null argument");
    write_file_atomic(path, content);
    return AL_OK;
  });
}

// -------------------------------------------------------------- victims ----

al_status al_victim_open(const char* spec_path, al_victim** out) {
  if (out) *out = nullptr;
  return guarded([&]() -> al_status {
    if (!spec_path || !out) fail(ErrorKind::invalid_argument, "victim open: null argument");
    Victim v = make_victim(load_victim_spec(spec_path));
    auto* h = new al_victim{std::move(v.oracle), std::move(v.truth)};
    *out = h;
    return AL_OK;
  });
}

al_status al_victim_open_remote(const char* address, size_t dim, int timeout_ms, al_victim** out) {
  if (out) *out = nullptr;
  return guarded([&]() -> al_status {
    if (!address || !out) fail(ErrorKind::invalid_argument, "victim open: null argument");
    if (dim < 1) bad_config("victim open: remote victims need the ambient dimension");
    auto oracle = connect_remote_victim(address, dim, timeout_ms);
    *out = new al_victim{std::move(oracle), nullptr};
    return AL_OK;
  });
}

size_t al_victim_dim(const al_victim* v) { return v && v->oracle ? v->oracle->dim() : 0; }

int al_victim_has_truth(const al_victim* v) { return v && v->truth ? 1 : 0; }

al_status al_victim_query_sign(al_victim* v, const double* x, size_t len, int* sign_out) {
  return guarded([&]() -> al_status {
    need_victim(v, "query");
    if (!x || !sign_out) fail(ErrorKind::invalid_argument, "query: null argument");
    *sign_out = v->oracle->query_sign(Vec::from(std::vector<double>(x, x + len)));
    return AL_OK;
  });
}

uint64_t al_victim_query_count(const al_victim* v) {
  return v && v->oracle ? v->oracle->query_count() : 0;
}

void al_victim_close(al_victim* v) { delete v; }

// -------------------------------------------------------------- serving ----

al_status al_server_open(const char* victim_spec_path, const char* host, uint16_t port,
                         al_log_fn on_connection, void* log_ctx, al_server** out) {
  if (out) *out = nullptr;
  return guarded([&]() -> al_status {
    if (!victim_spec_path || !host || !out)
      fail(ErrorKind::invalid_argument, "serve: null argument");
    auto server = serve_victim(load_victim_spec(victim_spec_path), host, port);
    if (on_connection)
      server->set_connection_logger(
          [on_connection, log_ctx](const std::string& peer) { on_connection(peer.c_str(), log_ctx); });
    server->start();
    *out = new al_server{std::move(server)};
    return AL_OK;
  });
}

uint16_t al_server_port(const al_server* s) { return s && s->server ? s->server->port() : 0; }

void al_server_close(al_server* s) {
  if (!s) return;
  s->server->stop();
  delete s;
}

// ---------------------------------------------------------- projections ----

al_status al_projection_spec_parse(const char* text, char** json_out) {
  if (json_out) *json_out = nullptr;
  return guarded([&]() -> al_status {
    if (!text || !json_out) fail(ErrorKind::invalid_argument, "projection parse: null argument");
    const ProjectionSpec spec = projection_spec_from_json(projection_arg_json(text));
    *json_out = dup_string(projection_spec_to_json(spec).dump());
    return AL_OK;
  });
}

// ------------------------------------------------------------- commands ----

al_status al_cmd_attack(al_victim* victim, const char* config_json, const char* out_dir,
                        char** summary_json_out) {
  if (summary_json_out) *summary_json_out = nullptr;
  return guarded([&]() -> al_status {
    need_victim(victim, "attack");
    if (!out_dir || !*out_dir)
      fail(ErrorKind::invalid_argument, "attack: missing output directory");
    const json cfg = parse_config(config_json);
    ConfigReader r(cfg, "attack config");

    AttackPairsConfig pc;
    pc.projection = projection_spec_from_json(r.object_required("projection"));
    pc.attack.budget = r.u64_required("budget");
    pc.attack.theta = r.num("theta", 1e-3);
    pc.attack.initial_B = r.size("initial_B", 10);
    pc.attack.max_iterations = r.size("max_iterations", 0);
    pc.attack.seed = r.u64("seed", 0);
    pc.attack.success_mse = r.num("success_mse", 1e-4);
    pc.attack.estimator.delta = r.num("delta", 0.0);
    const std::string sampling = r.str("sampling", "frame");
    const std::string lift = r.str("lift", "precise");
    pc.attack.estimator.sampling_mode = sampling_of(sampling);
    pc.attack.estimator.lift_mode = lift_of(lift);
    pc.pairs = r.size("pairs", 1);
    pc.pair_scale = r.num("pair_scale", 1.0);
    r.done();

    config_check(pc.attack.budget >= 1, "attack config: budget must be >= 1");
    config_check(pc.attack.theta > 0.0 && pc.attack.theta < 1.0,
                 "attack config: theta must lie in (0, 1)");
    config_check(pc.attack.initial_B >= 1, "attack config: initial_B must be >= 1");
    config_check(pc.attack.success_mse > 0.0, "attack config: success_mse must be > 0");
    config_check(pc.attack.estimator.delta >= 0.0,
                 "attack config: delta must be >= 0 (0 scales with the current distance)");
    config_check(pc.pairs >= 1, "attack config: pairs must be >= 1");
    config_check(pc.pair_scale > 0.0, "attack config: pair_scale must be > 0");
    if (projection_needs_whitebox(pc.projection))
      bad_config("attack config: projection '" + pc.projection.kind +
                 "' needs gradient access; not usable in the attack loop");

    const json resolved = {{"command", "attack"},
                           {"projection", projection_spec_to_json(pc.projection)},
                           {"budget", pc.attack.budget},
                           {"theta", pc.attack.theta},
                           {"initial_B", pc.attack.initial_B},
                           {"max_iterations", pc.attack.max_iterations},
                           {"seed", pc.attack.seed},
                           {"success_mse", pc.attack.success_mse},
                           {"delta", pc.attack.estimator.delta},
                           {"sampling", sampling},
                           {"lift", lift},
                           {"pairs", pc.pairs},
                           {"pair_scale", pc.pair_scale}};

    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) fail(ErrorKind::io, "cannot create '" + std::string(out_dir) + "': " + ec.message());

    const AttackPairsOutcome out = run_attack_pairs(*victim->oracle, victim->truth.get(), pc);

    std::vector<std::string> names;
    names.reserve(pc.pairs);
    for (std::size_t i = 0; i < pc.pairs; ++i) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "pair_%03zu.csv", i);
      names.emplace_back(buf);
    }
    for (const PairOutcome& po : out.outcomes)
      if (!po.skipped)
        write_file_atomic((std::filesystem::path(out_dir) / names[po.index]).string(),
                          trace_to_csv(po.result.trace));

    const json summary = attack_summary_json(out, resolved, names, pc.attack.budget);
    const std::string text = pretty(summary);
    write_file_atomic((std::filesystem::path(out_dir) / "summary.json").string(), text);
    if (summary_json_out) *summary_json_out = dup_string(text);

    if (out.skipped > 0) {
      set_error(std::to_string(out.skipped) + " of " + std::to_string(out.outcomes.size()) +
                " pairs violated attack preconditions and were skipped; see summary.json");
      return AL_E_PRECONDITION;
    }
    return AL_OK;
  });
}

al_status al_cmd_estimate(al_victim* victim, const char* config_json, const char* out_csv,
                          const char* out_scatter_csv, char** csv_out) {
  if (csv_out) *csv_out = nullptr;
  return guarded([&]() -> al_status {
    need_victim(victim, "estimate");
    const json cfg = parse_config(config_json);
    ConfigReader r(cfg, "estimate config");

    const json projection_json = r.object_required("projection");
    EstimateSweepConfig sc;
    sc.B_list = r.size_list_required("B_list");
    sc.trials = r.size("trials", 200);
    sc.estimator.delta = r.num("delta", 1e-3);
    const std::string sampling = r.str("sampling", "frame");
    const std::string lift = r.str("lift", "precise");
    sc.estimator.sampling_mode = sampling_of(sampling);
    sc.estimator.lift_mode = lift_of(lift);
    sc.seed = r.u64("seed", 0);
    const double scale = r.num("scale", 1.0);
    const double boundary_theta = r.num("boundary_theta", 1e-6);
    r.done();

    config_check(sc.trials >= 1, "estimate config: trials must be >= 1");
    config_check(sc.estimator.delta > 0.0, "estimate config: delta must be > 0");
    config_check(scale > 0.0, "estimate config: scale must be > 0");
    config_check(boundary_theta > 0.0 && boundary_theta < 1.0,
                 "estimate config: boundary_theta must lie in (0, 1)");

    const GroundTruth& truth = need_truth(victim, "estimate");
    MeasurementSetup setup =
        measurement_setup(victim, projection_json, scale, boundary_theta);
    check_frame_capacity(sc.estimator, *std::max_element(sc.B_list.begin(), sc.B_list.end()),
                         setup.probe->n());

    const json resolved = {{"command", "estimate"},
                           {"projection", projection_spec_to_json(setup.spec)},
                           {"B_list", sc.B_list},
                           {"trials", sc.trials},
                           {"delta", sc.estimator.delta},
                           {"sampling", sampling},
                           {"lift", lift},
                           {"seed", sc.seed},
                           {"scale", scale},
                           {"boundary_theta", boundary_theta}};

    Rng rng(sc.seed);
    const EstimateSweep sweep =
        run_estimate_sweep(truth, *victim->oracle, setup.projection_at, setup.base_point, sc, rng);

    const std::string csv = estimate_sweep_csv(sweep, resolved);
    if (out_csv) write_file_atomic(out_csv, csv);
    if (out_scatter_csv) write_file_atomic(out_scatter_csv, estimate_scatter_csv(sweep, resolved));
    if (csv_out) *csv_out = dup_string(csv);
    return AL_OK;
  });
}

al_status al_cmd_theory(al_victim* victim, const char* subcommand, const char* config_json,
                        const char* out_path, char** report_json_out) {
  if (report_json_out) *report_json_out = nullptr;
  return guarded([&]() -> al_status {
    if (!subcommand) fail(ErrorKind::invalid_argument, "theory: null subcommand");
    const json cfg = config_json ? parse_config(config_json) : json::object();
    const std::string sub = subcommand;

    json report;
    if (sub == "cn") {
      report = theory_cn(cfg);
    } else if (sub == "lemma1") {
      report = theory_lemma1(cfg);
    } else if (sub == "pa") {
      report = theory_pa(cfg);
    } else if (sub == "bounds") {
      report = theory_bounds(cfg);
    } else if (sub == "sandwich") {
      report = theory_sandwich(need_victim(victim, "sandwich"), cfg);
    } else if (sub == "qcfit") {
      report = theory_qcfit(need_victim(victim, "qcfit"), cfg);
    } else {
      bad_config("theory: unknown subcommand '" + sub + "'");
    }

    const std::string text = pretty(report);
    if (out_path) write_file_atomic(out_path, text);
    if (report_json_out) *report_json_out = dup_string(text);
    if (!report["pass"].get<bool>()) {
      set_error("theory " + sub + ": check failed; see the report for details");
      return AL_E_CHECK;
    }
    return AL_OK;
  });
}

// ------------------------------------------------------ numeric kernels ----

double al_cn(size_t n) {
  double out = std::numeric_limits<double>::quiet_NaN();
  guarded([&]() -> al_status {
    out = compute_cn(n);
    return AL_OK;
  });
  return out;
}

double al_pa_pdf(size_t n, double x) {
  double out = std::numeric_limits<double>::quiet_NaN();
  guarded([&]() -> al_status {
    out = pa_pdf(n, x);
    return AL_OK;
  });
  return out;
}

double al_pa_cdf(size_t n, double x) {
  double out = std::numeric_limits<double>::quiet_NaN();
  guarded([&]() -> al_status {
    out = pa_cdf(n, x);
    return AL_OK;
  });
  return out;
}

al_status al_omega(const char* profile_json, double* out) {
  return guarded([&]() -> al_status {
    if (!profile_json || !out) fail(ErrorKind::invalid_argument, "omega: null argument");
    *out = compute_omega(profile_from_json(parse_config(profile_json)));
    return AL_OK;
  });
}

al_status al_omega_curved(const char* profile_json, double* out) {
  return guarded([&]() -> al_status {
    if (!profile_json || !out) fail(ErrorKind::invalid_argument, "omega: null argument");
    *out = compute_omega_thm2(profile_from_json(parse_config(profile_json)));
    return AL_OK;
  });
}

al_status al_cosine_bounds(const char* profile_json, double omega, double* lower, double* upper,
                           double* relaxed_lower) {
  return guarded([&]() -> al_status {
    if (!profile_json || !lower || !upper)
      fail(ErrorKind::invalid_argument, "bounds: null argument");
    const CosineBounds b = theorem1_bounds(profile_from_json(parse_config(profile_json)), omega);
    *lower = b.lower;
    *upper = b.upper;
    if (relaxed_lower) *relaxed_lower = b.relaxed_lower;
    return AL_OK;
  });
}

}  // extern "C"
