/* C interface to the attacklab core: black-box victims, projection-based
 * gradient estimation, boundary attacks, and the numeric verification
 * reports.  All functions are thread-compatible; one handle must not be
 * shared between threads without external locking.
 *
 * Strings returned through char** out-parameters are heap-allocated and must
 * be released with al_string_free.  On any failure the thread-local message
 * from al_last_error() describes what went wrong.
 */
#ifndef ATTACKLAB_H
#define ATTACKLAB_H

#include <stddef.h>
#include <stdint.h>

#ifndef AL_API
#define AL_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes; the first five double as exit codes of the bundled CLI. */
typedef enum al_status {
  AL_OK = 0,
  AL_E_CHECK = 1,        /* a verification report finished with pass = false */
  AL_E_CONFIG = 2,       /* malformed or inconsistent configuration */
  AL_E_TRANSPORT = 3,    /* socket or wire-protocol failure */
  AL_E_PRECONDITION = 4, /* valid config, but the instance violates a precondition */
  AL_E_IO = 5,           /* filesystem failure */
  AL_E_INVALID = 6,      /* bad argument to an API call */
  AL_E_INTERNAL = 7      /* unexpected failure */
} al_status;

AL_API const char* al_version(void);

/* Message for the most recent failure on the calling thread; never NULL. */
AL_API const char* al_last_error(void);

AL_API void al_string_free(char* s);

/* Atomic write (temp file + rename in the target directory). */
AL_API al_status al_write_file(const char* path, const char* content);

/* ---------------------------------------------------------- victims ---- */

typedef struct al_victim al_victim;

/* Opens a victim from a JSON spec file (kinds: linear, quadratic, mlp,
 * remote).  Remote specs connect immediately. */
AL_API al_status al_victim_open(const char* spec_path, al_victim** out);

/* Connects to a served victim at "host:port"; dim must match the server. */
AL_API al_status al_victim_open_remote(const char* address, size_t dim, int timeout_ms,
                                       al_victim** out);

AL_API size_t al_victim_dim(const al_victim* v);

/* 1 when the victim carries an analytic side (local kinds); 0 for remote. */
AL_API int al_victim_has_truth(const al_victim* v);

/* sign_out receives +1 (adversarial; ties report +1) or -1 (benign). */
AL_API al_status al_victim_query_sign(al_victim* v, const double* x, size_t len, int* sign_out);

AL_API uint64_t al_victim_query_count(const al_victim* v);

AL_API void al_victim_close(al_victim* v);

/* ---------------------------------------------------------- serving ---- */

typedef struct al_server al_server;

/* Called once per accepted connection with the peer "host:port". */
typedef void (*al_log_fn)(const char* line, void* ctx);

/* Loads a local victim spec and serves it on host:port (port 0 picks an
 * ephemeral one; read it back with al_server_port).  The server runs on
 * background threads until al_server_close. */
AL_API al_status al_server_open(const char* victim_spec_path, const char* host, uint16_t port,
                                al_log_fn on_connection, void* log_ctx, al_server** out);

AL_API uint16_t al_server_port(const al_server* s);

AL_API void al_server_close(al_server* s);

/* ----------------------------------------------------- projections ---- */

/* Normalizes a projection argument to canonical spec JSON.  Accepts a JSON
 * object string, a path to a JSON file, a bare kind ("identity"), or the
 * compact form kind:key=value[,key=value...], e.g.
 * "orthonormal:n=64,haar_seed=3". */
AL_API al_status al_projection_spec_parse(const char* text, char** json_out);

/* ---------------------------------------------------------- commands ----
 *
 * Each command takes a JSON config object, rejects unknown keys, validates
 * everything before the first oracle query, writes its artifacts atomically,
 * and echoes the fully resolved config (defaults filled in) into the
 * artifact.
 */

/* Runs attacks on sampled (source, target) pairs and writes one trace CSV
 * per pair plus summary.json into out_dir.  Returns the summary JSON.
 *
 * Config keys: projection (spec object, required), budget (required), theta,
 * initial_B, max_iterations, seed, success_mse, delta, sampling
 * ("frame"|"gaussian"), lift ("precise"|"approximate"), pairs, pair_scale.
 *
 * AL_E_PRECONDITION reports that at least one pair was skipped (summary and
 * the other traces are still written). */
AL_API al_status al_cmd_attack(al_victim* victim, const char* config_json, const char* out_dir,
                               char** summary_json_out);

/* Sweeps the estimator over sample sizes and reports mean cosine to the true
 * gradient per B.  Needs a victim with ground truth.  Writes the sweep CSV
 * to out_csv and, when out_scatter_csv is non-NULL, per-trial
 * (B, omega_proxy, cos) points there; either path may be NULL to skip the
 * file.  Returns the sweep CSV.
 *
 * Config keys: projection (required), B_list (required), trials, delta,
 * seed, sampling, lift, scale, boundary_theta. */
AL_API al_status al_cmd_estimate(al_victim* victim, const char* config_json, const char* out_csv,
                                 const char* out_scatter_csv, char** csv_out);

/* Runs one verification report.  Subcommands and their config keys:
 *   cn        n_max
 *   lemma1    n, samples, seed
 *   pa        n (array)
 *   bounds    profile (object, required), omega (override; default: derive)
 *   sandwich  projection (required), B (required), trials, delta, seed,
 *             scale, boundary_theta, measure_constants, constants_safety,
 *             omega, profile, sampling, lift      [needs victim with truth]
 *   qcfit     projection (required), B_list (required), trials, delta, seed,
 *             scale, boundary_theta, min_r2, sampling, lift  [needs victim]
 * victim may be NULL for cn, lemma1, pa, and bounds.  When out_path is
 * non-NULL the report is also written there.  AL_E_CHECK means the report
 * was produced but its check failed. */
AL_API al_status al_cmd_theory(al_victim* victim, const char* subcommand, const char* config_json,
                               const char* out_path, char** report_json_out);

/* ------------------------------------------------- numeric kernels ---- */

/* Dimension constant c_n (n >= 2); NaN and an al_last_error on bad input. */
AL_API double al_cn(size_t n);

/* Density / CDF of the inner product between a random unit vector and a
 * fixed one in R^n. */
AL_API double al_pa_pdf(size_t n, double x);
AL_API double al_pa_cdf(size_t n, double x);

/* profile_json keys: L_f, l_f, beta_f, L_S, beta_S, delta, n, B, proj_align,
 * grad_norm (all optional; defaults are the unit linear profile). */
AL_API al_status al_omega(const char* profile_json, double* out);

/* Sharper indicator for the curvature-bent constructed projection. */
AL_API al_status al_omega_curved(const char* profile_json, double* out);

/* Expected-cosine sandwich for the profile; AL_E_PRECONDITION when the
 * bound's assumption fails (omega larger than the projected alignment). */
AL_API al_status al_cosine_bounds(const char* profile_json, double omega, double* lower,
                                  double* upper, double* relaxed_lower);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* ATTACKLAB_H */
