// Command-line front end over the attacklab C API.  All semantics live
// behind the shared library; this file only parses flags, assembles config
// JSON, and maps statuses onto the exit contract:
//   0 pass, 1 failed check, 2 config, 3 transport, 4 precondition.
#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <attacklab.h>
#include <json.hpp>

using nlohmann::json;

namespace {

int exit_code(al_status st) {
  // io / invalid / internal all collapse onto the config slot; the stderr
  // message carries the distinction.
  return st <= AL_E_PRECONDITION ? static_cast<int>(st) : static_cast<int>(AL_E_CONFIG);
}

int fail_status(al_status st) {
  std::fprintf(stderr, "error: %s\n", al_last_error());
  return exit_code(st);
}

int usage_error(const std::string& msg) {
  std::fprintf(stderr, "error: %s\n", msg.c_str());
  return static_cast<int>(AL_E_CONFIG);
}

struct VictimGuard {
  al_victim* v = nullptr;
  ~VictimGuard() { al_victim_close(v); }
};

struct StringGuard {
  char* s = nullptr;
  ~StringGuard() { al_string_free(s); }
  std::string str() const { return s ? s : ""; }
};

bool split_host_port(const std::string& addr, std::string& host, std::uint16_t& port) {
  const std::size_t colon = addr.rfind(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 >= addr.size()) return false;
  char* end = nullptr;
  const unsigned long p = std::strtoul(addr.c_str() + colon + 1, &end, 10);
  if (!end || *end != '\0' || p > 65535) return false;
  host = addr.substr(0, colon);
  port = static_cast<std::uint16_t>(p);
  return true;
}

// --victim accepts a local spec path or tcp://host:port (which needs --dim).
bool open_victim(const std::string& arg, std::size_t dim, int timeout_ms, VictimGuard& out,
                 int& exit_out) {
  al_status st;
  if (arg.rfind("tcp://", 0) == 0) {
    if (dim == 0) {
      exit_out = usage_error("remote victims need --dim (the wire handshake declares it)");
      return false;
    }
    st = al_victim_open_remote(arg.substr(6).c_str(), dim, timeout_ms, &out.v);
  } else {
    st = al_victim_open(arg.c_str(), &out.v);
  }
  if (st != AL_OK) {
    exit_out = fail_status(st);
    return false;
  }
  return true;
}

bool parse_projection(const std::string& arg, json& out, int& exit_out) {
  StringGuard canonical;
  const al_status st = al_projection_spec_parse(arg.c_str(), &canonical.s);
  if (st != AL_OK) {
    exit_out = fail_status(st);
    return false;
  }
  out = json::parse(canonical.str());
  return true;
}

bool load_json_file(const std::string& path, json& out, int& exit_out) {
  std::FILE* f = std::fopen(path.c_str(), "rb");
  if (!f) {
    exit_out = usage_error("cannot open '" + path + "'");
    return false;
  }
  std::string body;
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof(buf), f)) > 0) body.append(buf, n);
  std::fclose(f);
  out = json::parse(body, nullptr, false);
  if (out.is_discarded()) {
    exit_out = usage_error("'" + path + "' is not valid JSON");
    return false;
  }
  return true;
}

std::atomic<bool> g_stop{false};
void on_signal(int) { g_stop.store(true); }

int run_serve(const std::string& config, const std::string& listen) {
  std::string host;
  std::uint16_t port = 0;
  if (!split_host_port(listen, host, port)) return usage_error("--listen must be host:port");

  auto log_cb = +[](const char* line, void*) {
    std::printf("connection from %s\n", line);
    std::fflush(stdout);
  };
  al_server* server = nullptr;
  const al_status st = al_server_open(config.c_str(), host.c_str(), port, log_cb, nullptr, &server);
  if (st != AL_OK) return fail_status(st);

  std::printf("serving %s on %s:%u\n", config.c_str(), host.c_str(),
              static_cast<unsigned>(al_server_port(server)));
  std::fflush(stdout);

  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  while (!g_stop.load()) std::this_thread::sleep_for(std::chrono::milliseconds(50));

  al_server_close(server);
  return 0;
}

int run_theory(al_victim* victim, const std::string& sub, const json& cfg,
               const std::string& out_path) {
  StringGuard report;
  const al_status st =
      al_cmd_theory(victim, sub.c_str(), cfg.dump().c_str(), out_path.c_str(), &report.s);
  if (st != AL_OK && st != AL_E_CHECK) return fail_status(st);
  std::printf("theory %s: %s (report: %s)\n", sub.c_str(), st == AL_OK ? "PASS" : "FAIL",
              out_path.c_str());
  return exit_code(st);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"black-box boundary attacks with projected gradient estimation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", al_version());

  int runner_exit = 0;
  std::function<int()> runner;

  // ------------------------------------------------------- victim-serve ----
  auto* serve = app.add_subcommand("victim-serve", "serve a victim spec over TCP");
  std::string serve_config, serve_listen;
  serve->add_option("--config", serve_config, "victim spec JSON file")->required();
  serve->add_option("--listen", serve_listen, "host:port to bind")->required();
  serve->callback([&] { runner = [&] { return run_serve(serve_config, serve_listen); }; });

  // ------------------------------------------------------------- attack ----
  auto* attack = app.add_subcommand("attack", "run boundary attacks on sampled pairs");
  std::string atk_victim, atk_projection, atk_out, atk_sampling, atk_lift;
  std::uint64_t atk_budget = 0, atk_seed = 0;
  std::size_t atk_dim = 0, atk_pairs = 1, atk_initial_B = 10, atk_max_iter = 0;
  int atk_timeout = 10000;
  double atk_theta = 1e-3, atk_success_mse = 1e-4, atk_delta = 0.0, atk_pair_scale = 1.0;
  attack->add_option("--victim", atk_victim, "victim spec path or tcp://host:port")->required();
  attack->add_option("--dim", atk_dim, "ambient dimension (remote victims only)");
  attack->add_option("--timeout-ms", atk_timeout, "remote connect/read timeout");
  attack->add_option("--projection", atk_projection,
                     "projection spec: JSON, file, or kind:key=value,...")
      ->required();
  attack->add_option("--budget", atk_budget, "total sign-query budget per pair")->required();
  attack->add_option("--theta", atk_theta, "binary-search precision");
  attack->add_option("--seed", atk_seed, "master seed")->envname("ATTACKLAB_SEED");
  attack->add_option("--pairs", atk_pairs, "number of (source, target) pairs");
  attack->add_option("--initial-B", atk_initial_B, "estimator samples at iteration 1");
  attack->add_option("--max-iterations", atk_max_iter, "iteration cap (0 = budget-bound)");
  attack->add_option("--success-mse", atk_success_mse, "success threshold on final MSE");
  attack->add_option("--delta", atk_delta, "probe radius (0 = scale with distance)");
  attack->add_option("--sampling", atk_sampling, "frame | gaussian");
  attack->add_option("--lift", atk_lift, "precise | approximate");
  attack->add_option("--pair-scale", atk_pair_scale, "std dev of the pair-sampling cloud");
  attack->add_option("--out", atk_out, "output directory for traces + summary.json")->required();
  attack->callback([&] {
    runner = [&]() -> int {
      json projection;
      int code = 0;
      if (!parse_projection(atk_projection, projection, code)) return code;
      VictimGuard victim;
      if (!open_victim(atk_victim, atk_dim, atk_timeout, victim, code)) return code;

      json cfg{{"projection", projection}, {"budget", atk_budget}, {"seed", atk_seed}};
      if (attack->count("--theta")) cfg["theta"] = atk_theta;
      if (attack->count("--pairs")) cfg["pairs"] = atk_pairs;
      if (attack->count("--initial-B")) cfg["initial_B"] = atk_initial_B;
      if (attack->count("--max-iterations")) cfg["max_iterations"] = atk_max_iter;
      if (attack->count("--success-mse")) cfg["success_mse"] = atk_success_mse;
      if (attack->count("--delta")) cfg["delta"] = atk_delta;
      if (attack->count("--sampling")) cfg["sampling"] = atk_sampling;
      if (attack->count("--lift")) cfg["lift"] = atk_lift;
      if (attack->count("--pair-scale")) cfg["pair_scale"] = atk_pair_scale;

      StringGuard summary;
      const al_status st = al_cmd_attack(victim.v, cfg.dump().c_str(), atk_out.c_str(), &summary.s);
      if (st != AL_OK && st != AL_E_PRECONDITION) return fail_status(st);

      const json s = json::parse(summary.str());
      const json& agg = s["aggregate"];
      std::printf("attack: %llu/%llu pairs completed, median final MSE %g (%s/summary.json)\n",
                  static_cast<unsigned long long>(agg["completed"].get<std::uint64_t>()),
                  static_cast<unsigned long long>(agg["attempted"].get<std::uint64_t>()),
                  agg["median_final_mse"].get<double>(), atk_out.c_str());
      if (st == AL_E_PRECONDITION) std::fprintf(stderr, "warning: %s\n", al_last_error());
      return exit_code(st);
    };
  });

  // ----------------------------------------------------------- estimate ----
  auto* est = app.add_subcommand("estimate", "sweep estimator quality against ground truth");
  std::string est_victim, est_projection, est_out, est_scatter, est_sampling, est_lift;
  std::vector<std::size_t> est_B;
  std::size_t est_trials = 200;
  std::uint64_t est_seed = 0;
  double est_delta = 1e-3, est_scale = 1.0;
  est->add_option("--victim", est_victim, "victim spec path (needs ground truth)")->required();
  est->add_option("--projection", est_projection,
                  "projection spec: JSON, file, or kind:key=value,...")
      ->required();
  est->add_option("--B-list", est_B, "sample sizes, comma separated")
      ->required()
      ->delimiter(',');
  est->add_option("--trials", est_trials, "estimates per B");
  est->add_option("--delta", est_delta, "probe radius");
  est->add_option("--seed", est_seed, "seed")->envname("ATTACKLAB_SEED");
  est->add_option("--sampling", est_sampling, "frame | gaussian");
  est->add_option("--lift", est_lift, "precise | approximate");
  est->add_option("--scale", est_scale, "std dev of the base-point cloud");
  est->add_option("--out", est_out, "sweep CSV path")->required();
  est->add_option("--scatter", est_scatter, "per-trial (B, omega_proxy, cos) CSV path");
  est->callback([&] {
    runner = [&]() -> int {
      json projection;
      int code = 0;
      if (!parse_projection(est_projection, projection, code)) return code;
      VictimGuard victim;
      if (!open_victim(est_victim, 0, 10000, victim, code)) return code;

      json cfg{{"projection", projection}, {"B_list", est_B}, {"seed", est_seed}};
      if (est->count("--trials")) cfg["trials"] = est_trials;
      if (est->count("--delta")) cfg["delta"] = est_delta;
      if (est->count("--sampling")) cfg["sampling"] = est_sampling;
      if (est->count("--lift")) cfg["lift"] = est_lift;
      if (est->count("--scale")) cfg["scale"] = est_scale;

      StringGuard csv;
      const al_status st =
          al_cmd_estimate(victim.v, cfg.dump().c_str(), est_out.c_str(),
                          est_scatter.empty() ? nullptr : est_scatter.c_str(), &csv.s);
      if (st != AL_OK) return fail_status(st);
      std::printf("estimate: wrote %s\n", est_out.c_str());
      return 0;
    };
  });

  // ------------------------------------------------------------- theory ----
  auto* theory = app.add_subcommand("theory", "numeric verification reports");
  theory->require_subcommand(1);

  auto* cn = theory->add_subcommand("cn", "dimension-constant bounds and monotonicity");
  std::size_t cn_n_max = 200;
  std::string cn_out;
  cn->add_option("--n-max", cn_n_max, "largest dimension to check");
  cn->add_option("--out", cn_out, "report JSON path")->required();
  cn->callback([&] {
    runner = [&] {
      json cfg = json::object();
      if (cn->count("--n-max")) cfg["n_max"] = cn_n_max;
      return run_theory(nullptr, "cn", cfg, cn_out);
    };
  });

  auto* lemma1 = theory->add_subcommand("lemma1", "sampled inner-product distribution vs pa_cdf");
  std::size_t l1_n = 16, l1_samples = 100000;
  std::uint64_t l1_seed = 0;
  std::string l1_out;
  lemma1->add_option("--n", l1_n, "sphere dimension");
  lemma1->add_option("--samples", l1_samples, "number of draws");
  lemma1->add_option("--seed", l1_seed, "seed")->envname("ATTACKLAB_SEED");
  lemma1->add_option("--out", l1_out, "report JSON path")->required();
  lemma1->callback([&] {
    runner = [&] {
      json cfg{{"seed", l1_seed}};
      if (lemma1->count("--n")) cfg["n"] = l1_n;
      if (lemma1->count("--samples")) cfg["samples"] = l1_samples;
      return run_theory(nullptr, "lemma1", cfg, l1_out);
    };
  });

  auto* pa = theory->add_subcommand("pa", "density normalization, symmetry, CDF anchors");
  std::vector<std::size_t> pa_n;
  std::string pa_out;
  pa->add_option("--n", pa_n, "dimensions, comma separated")->delimiter(',');
  pa->add_option("--out", pa_out, "report JSON path")->required();
  pa->callback([&] {
    runner = [&] {
      json cfg = json::object();
      if (pa->count("--n")) cfg["n"] = pa_n;
      return run_theory(nullptr, "pa", cfg, pa_out);
    };
  });

  auto* bounds = theory->add_subcommand("bounds", "expected-cosine sandwich for a profile");
  std::string bounds_profile, bounds_out;
  double bounds_omega = -1.0;
  bounds->add_option("--profile", bounds_profile, "smoothness profile JSON file")->required();
  bounds->add_option("--omega", bounds_omega, "override the derived omega");
  bounds->add_option("--out", bounds_out, "report JSON path")->required();
  bounds->callback([&] {
    runner = [&]() -> int {
      json profile;
      int code = 0;
      if (!load_json_file(bounds_profile, profile, code)) return code;
      json cfg{{"profile", profile}};
      if (bounds->count("--omega")) cfg["omega"] = bounds_omega;
      return run_theory(nullptr, "bounds", cfg, bounds_out);
    };
  });

  auto* sandwich = theory->add_subcommand("sandwich", "Monte Carlo check of the cosine sandwich");
  std::string sw_victim, sw_projection, sw_profile, sw_out, sw_sampling, sw_lift;
  std::size_t sw_B = 0, sw_trials = 1000;
  std::uint64_t sw_seed = 0;
  double sw_delta = 1e-3, sw_scale = 1.0, sw_safety = 1.5, sw_omega = -1.0;
  bool sw_no_measure = false;
  sandwich->add_option("--victim", sw_victim, "victim spec path (needs ground truth)")->required();
  sandwich->add_option("--projection", sw_projection, "projection spec")->required();
  sandwich->add_option("--B", sw_B, "estimator sample size")->required();
  sandwich->add_option("--trials", sw_trials, "Monte Carlo trials");
  sandwich->add_option("--delta", sw_delta, "probe radius");
  sandwich->add_option("--seed", sw_seed, "seed")->envname("ATTACKLAB_SEED");
  sandwich->add_option("--scale", sw_scale, "std dev of the base-point cloud");
  sandwich->add_flag("--no-measure-constants", sw_no_measure,
                     "trust the profile template instead of measuring L_S/beta_S");
  sandwich->add_option("--constants-safety", sw_safety, "inflation on measured constants");
  sandwich->add_option("--omega", sw_omega, "override the derived omega");
  sandwich->add_option("--profile", sw_profile, "profile template JSON file");
  sandwich->add_option("--sampling", sw_sampling, "frame | gaussian");
  sandwich->add_option("--lift", sw_lift, "precise | approximate");
  sandwich->add_option("--out", sw_out, "report JSON path")->required();
  sandwich->callback([&] {
    runner = [&]() -> int {
      json projection;
      int code = 0;
      if (!parse_projection(sw_projection, projection, code)) return code;
      VictimGuard victim;
      if (!open_victim(sw_victim, 0, 10000, victim, code)) return code;

      json cfg{{"projection", projection}, {"B", sw_B}, {"seed", sw_seed}};
      if (sandwich->count("--trials")) cfg["trials"] = sw_trials;
      if (sandwich->count("--delta")) cfg["delta"] = sw_delta;
      if (sandwich->count("--scale")) cfg["scale"] = sw_scale;
      if (sw_no_measure) cfg["measure_constants"] = false;
      if (sandwich->count("--constants-safety")) cfg["constants_safety"] = sw_safety;
      if (sandwich->count("--omega")) cfg["omega"] = sw_omega;
      if (sandwich->count("--sampling")) cfg["sampling"] = sw_sampling;
      if (sandwich->count("--lift")) cfg["lift"] = sw_lift;
      if (!sw_profile.empty()) {
        json profile;
        if (!load_json_file(sw_profile, profile, code)) return code;
        cfg["profile"] = profile;
      }
      return run_theory(victim.v, "sandwich", cfg, sw_out);
    };
  });

  auto* qcfit = theory->add_subcommand("qcfit", "sqrt-B scaling fit of the mean cosine");
  std::string qc_victim, qc_projection, qc_out, qc_sampling, qc_lift;
  std::vector<std::size_t> qc_B;
  std::size_t qc_trials = 200;
  std::uint64_t qc_seed = 0;
  double qc_delta = 1e-3, qc_scale = 1.0, qc_min_r2 = 0.95;
  qcfit->add_option("--victim", qc_victim, "victim spec path (needs ground truth)")->required();
  qcfit->add_option("--projection", qc_projection, "projection spec")->required();
  qcfit->add_option("--B-list", qc_B, "sample sizes, comma separated")
      ->required()
      ->delimiter(',');
  qcfit->add_option("--trials", qc_trials, "estimates per B");
  qcfit->add_option("--delta", qc_delta, "probe radius");
  qcfit->add_option("--seed", qc_seed, "seed")->envname("ATTACKLAB_SEED");
  qcfit->add_option("--scale", qc_scale, "std dev of the base-point cloud");
  qcfit->add_option("--min-r2", qc_min_r2, "pass threshold on R^2");
  qcfit->add_option("--sampling", qc_sampling, "frame | gaussian");
  qcfit->add_option("--lift", qc_lift, "precise | approximate");
  qcfit->add_option("--out", qc_out, "report JSON path")->required();
  qcfit->callback([&] {
    runner = [&]() -> int {
      json projection;
      int code = 0;
      if (!parse_projection(qc_projection, projection, code)) return code;
      VictimGuard victim;
      if (!open_victim(qc_victim, 0, 10000, victim, code)) return code;

      json cfg{{"projection", projection}, {"B_list", qc_B}, {"seed", qc_seed}};
      if (qcfit->count("--trials")) cfg["trials"] = qc_trials;
      if (qcfit->count("--delta")) cfg["delta"] = qc_delta;
      if (qcfit->count("--scale")) cfg["scale"] = qc_scale;
      if (qcfit->count("--min-r2")) cfg["min_r2"] = qc_min_r2;
      if (qcfit->count("--sampling")) cfg["sampling"] = qc_sampling;
      if (qcfit->count("--lift")) cfg["lift"] = qc_lift;
      return run_theory(victim.v, "qcfit", cfg, qc_out);
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    // CLI11's own exit codes mean "usage problem" here, except --help/--version.
    return rc == 0 ? 0 : static_cast<int>(AL_E_CONFIG);
  }

  if (!runner) return usage_error("missing subcommand");
  runner_exit = runner();
  return runner_exit;
}
