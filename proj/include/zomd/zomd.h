/* SPDX-License-Identifier: Apache-2.0 */
/*
 * C interface of the zomd simulator: online distributed zeroth-order mirror
 * descent over time-varying digraphs.
 *
 * Objects are opaque handles released with their *_free function. Every
 * fallible call returns a zomd_status; on failure zomd_last_error() holds a
 * message for the calling thread. Strings handed out through char** are
 * owned by the caller and released with zomd_string_free().
 */
#ifndef ZOMD_H
#define ZOMD_H

#include <stddef.h>
#include <stdint.h>

#if defined(ZOMD_BUILDING_LIBRARY)
#define ZOMD_API __attribute__((visibility("default")))
#else
#define ZOMD_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum zomd_status {
  ZOMD_OK = 0,
  ZOMD_ERR_RUNTIME = 1,          /* non-finite value or failed inner solve during a run */
  ZOMD_ERR_CONFIG = 2,           /* malformed or inconsistent configuration */
  ZOMD_ERR_SCHEDULE = 3,         /* alpha_t < 2G or inadmissible schedule, violations not allowed */
  ZOMD_ERR_CHECK_FAILED = 4,     /* a diagnostic ran and found violations */
  ZOMD_ERR_INVALID_ARGUMENT = 5, /* bad parameter or null handle */
  ZOMD_ERR_IO = 6
} zomd_status;

typedef struct zomd_config_s* zomd_config;
typedef struct zomd_metrics_s* zomd_metrics;
typedef struct zomd_quantiles_s* zomd_quantiles;

ZOMD_API const char* zomd_version(void);
ZOMD_API const char* zomd_last_error(void);
/* Round named by the last ZOMD_ERR_SCHEDULE on this thread, 0 if none. */
ZOMD_API size_t zomd_last_error_round(void);
ZOMD_API void zomd_string_free(char* s);

/* ---- configuration ------------------------------------------------------ */

/* `overrides` are "section.key=value" strings; may be NULL when n_overrides is 0. */
ZOMD_API zomd_status zomd_config_parse(const char* json_text, const char* const* overrides, size_t n_overrides,
                                       zomd_config* out);
ZOMD_API zomd_status zomd_config_load(const char* path, const char* const* overrides, size_t n_overrides,
                                      zomd_config* out);
ZOMD_API zomd_status zomd_config_set_seed(zomd_config config, uint64_t seed);
ZOMD_API zomd_status zomd_config_resolved_json(zomd_config config, char** out_json);
ZOMD_API unsigned zomd_config_threads(zomd_config config);
ZOMD_API void zomd_config_free(zomd_config config);

/* ---- single runs -------------------------------------------------------- */

ZOMD_API zomd_status zomd_run(zomd_config config, zomd_metrics* out);
ZOMD_API size_t zomd_metrics_horizon(zomd_metrics metrics);
ZOMD_API size_t zomd_metrics_agents(zomd_metrics metrics);
ZOMD_API size_t zomd_metrics_dimension(zomd_metrics metrics);
/* Cumulative dynamic regret R_i(t), t in [1, T], agent in [0, n). */
ZOMD_API zomd_status zomd_metrics_regret(zomd_metrics metrics, size_t t, size_t agent, double* out);
/* max_i ||x_i(t) - xbar(t)||, t in [1, T+1]. */
ZOMD_API zomd_status zomd_metrics_consensus_error(zomd_metrics metrics, size_t t, double* out);
/* x_i(t) into out[0..dimension), t in [1, T+1]. */
ZOMD_API zomd_status zomd_metrics_state(zomd_metrics metrics, size_t t, size_t agent, double* out, size_t capacity);
ZOMD_API double zomd_metrics_path_variation(zomd_metrics metrics);
ZOMD_API size_t zomd_metrics_oracle_calls(zomd_metrics metrics);
ZOMD_API size_t zomd_metrics_warning_count(zomd_metrics metrics);
ZOMD_API const char* zomd_metrics_warning(zomd_metrics metrics, size_t index);
/* metrics.csv and benchmark.csv into `dir` (created if missing). */
ZOMD_API zomd_status zomd_metrics_write_csv(zomd_metrics metrics, const char* dir);
/* Number of rounds where the consensus error exceeds its geometric envelope. */
ZOMD_API zomd_status zomd_consensus_envelope_check(zomd_config config, zomd_metrics metrics, size_t* failing_rounds);
ZOMD_API void zomd_metrics_free(zomd_metrics metrics);

/* ---- multi-seed quantiles ---------------------------------------------- */

ZOMD_API zomd_status zomd_multi_seed(zomd_config config, const uint64_t* seeds, size_t n_seeds, unsigned threads,
                                     zomd_quantiles* out);
ZOMD_API size_t zomd_quantiles_checkpoint_count(zomd_quantiles q);
ZOMD_API size_t zomd_quantiles_checkpoint(zomd_quantiles q, size_t index);
ZOMD_API size_t zomd_quantiles_delta_count(zomd_quantiles q);
ZOMD_API double zomd_quantiles_delta(zomd_quantiles q, size_t index);
ZOMD_API zomd_status zomd_quantiles_value(zomd_quantiles q, size_t checkpoint_index, size_t delta_index, double* out);
ZOMD_API zomd_status zomd_quantiles_write_csv(zomd_quantiles q, const char* path);
ZOMD_API void zomd_quantiles_free(zomd_quantiles q);

/* ---- diagnostics -------------------------------------------------------- */

/* kernel_spec: "example", "legendre:<ell>" or ascending coefficients "c0,c1,...".
 * order 0 means "derive from the spec". Returns ZOMD_ERR_CHECK_FAILED on a violation;
 * the report is produced either way. */
ZOMD_API zomd_status zomd_check_kernel(const char* kernel_spec, size_t order, double eps, char** report);

/* Validates the configured graph schedule; ZOMD_ERR_CHECK_FAILED on any violation. */
ZOMD_API zomd_status zomd_check_graph(zomd_config config, char** report);

typedef struct zomd_bias_sweep_options {
  unsigned power;        /* f(x) = sum_k x_k^power */
  size_t dimension;
  double point;          /* every coordinate of the query point */
  const double* gammas;
  size_t n_gammas;
  size_t samples;
  uint64_t seed;
  const char* kernel;    /* as in zomd_check_kernel; NULL means "example" */
  const char* noise;     /* "none", "constant:c", "gaussian:mean:sd", "f:d1:d2"; NULL means "none" */
} zomd_bias_sweep_options;

/* CSV text: gamma, mean_1..mean_m, stderr, true_grad_1..true_grad_m. */
ZOMD_API zomd_status zomd_bias_sweep(const zomd_bias_sweep_options* options, char** csv);

/* Sensor-network reproduction: one traced run (seed) plus a quantile pass over
 * seeds seed..seed+n_seeds-1. Writes the CSVs into out_dir and a summary into
 * report. Returns ZOMD_ERR_CHECK_FAILED when regret is not sublinear. */
ZOMD_API zomd_status zomd_reproduce_paper(const char* out_dir, uint64_t seed, size_t n_seeds, size_t horizon,
                                          unsigned threads, char** report);

#ifdef __cplusplus
}
#endif

#endif /* ZOMD_H */
