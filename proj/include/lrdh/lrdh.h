/* C interface to the lrdh simulation library. */
#ifndef LRDH_LRDH_H
#define LRDH_LRDH_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define LRDH_API __declspec(dllexport)
#else
#define LRDH_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum lrdh_status {
  LRDH_OK = 0,
  LRDH_INVALID_ARGUMENT = 1,
  LRDH_CIRCULANT_EMBEDDING_FAILURE = 2,
  LRDH_CHOLESKY_FAILURE = 3,
  LRDH_QUADRATURE_UNSTABLE = 4,
  LRDH_RANK_NOT_FOUND = 5,
  LRDH_TRANSFORM_OVERFLOW = 6,
  LRDH_DEGENERATE_FIT = 7,
  LRDH_GRID_MISMATCH = 8,
  LRDH_COVERAGE_ERROR = 9,
  LRDH_OVERFLOW_GUARD = 10,
  LRDH_EMPTY_SAMPLE = 11,
  LRDH_NON_POSITIVE_DATA = 12,
  LRDH_TOO_FEW_SAMPLES = 13,
  LRDH_ZERO_MASS = 14,
  LRDH_CONFIG_ERROR = 15,
  LRDH_IO_ERROR = 16,
  LRDH_INTERNAL = 99
} lrdh_status;

typedef struct lrdh_config lrdh_config;
typedef struct lrdh_report lrdh_report;

typedef enum lrdh_preset { LRDH_PRESET_SMOKE = 0, LRDH_PRESET_FULL = 1 } lrdh_preset;

typedef enum lrdh_covariance_model {
  LRDH_COVARIANCE_CAUCHY = 0,
  LRDH_COVARIANCE_FGN_INCREMENT = 1
} lrdh_covariance_model;

/* Message of the last failed call on this thread; never NULL. */
LRDH_API const char* lrdh_last_error(void);
LRDH_API const char* lrdh_status_name(lrdh_status status);
LRDH_API const char* lrdh_version(void);

/* Number of experiments and the name at `index`. */
LRDH_API size_t lrdh_experiment_count(void);
LRDH_API const char* lrdh_experiment_name(size_t index);

/* Experiment configuration: preset defaults plus `key = value` overrides. */
LRDH_API lrdh_status lrdh_config_create(const char* experiment, lrdh_preset preset,
                                        lrdh_config** out);
/* Applies every key of a config file; a `preset` key in the file is ignored
 * here (read it with lrdh_config_file_preset). */
LRDH_API lrdh_status lrdh_config_load_file(lrdh_config* cfg, const char* path);
/* Writes the preset named in a config file, or leaves *out untouched and
 * sets *found = 0 when the file has none. */
LRDH_API lrdh_status lrdh_config_file_preset(const char* path, lrdh_preset* out, int* found);
LRDH_API lrdh_status lrdh_config_set(lrdh_config* cfg, const char* key, const char* value);
/* Canonical text of the config; the pointer lives until the next call on cfg. */
LRDH_API const char* lrdh_config_render(lrdh_config* cfg);
LRDH_API void lrdh_config_destroy(lrdh_config* cfg);

/* threads <= 0 selects LRDH_THREADS, else 1. */
LRDH_API lrdh_status lrdh_run_experiment(const lrdh_config* cfg, int threads,
                                         lrdh_report** out);
LRDH_API int lrdh_report_all_passed(const lrdh_report* report);
LRDH_API size_t lrdh_report_gate_count(const lrdh_report* report);
/* Borrowed strings stay valid until the report is destroyed. */
LRDH_API lrdh_status lrdh_report_gate(const lrdh_report* report, size_t index,
                                      const char** criterion, const char** description,
                                      double* value, double* target, double* tolerance,
                                      int* passed);
LRDH_API const char* lrdh_report_summary_csv(lrdh_report* report);
LRDH_API lrdh_status lrdh_report_write(const lrdh_report* report, const char* dir);
LRDH_API void lrdh_report_destroy(lrdh_report* report);

/* Numeric building blocks. */
LRDH_API lrdh_status lrdh_covariance_value(lrdh_covariance_model model, double alpha,
                                           double x, double* out);
LRDH_API lrdh_status lrdh_fbm_covariance(double hurst, double s, double t, double* out);
/* fBm on start + step * i, i < count, by the fast (use_cholesky = 0) or
 * Cholesky method; `out` must hold `count` values. */
LRDH_API lrdh_status lrdh_sample_fbm(double hurst, double start, double step, size_t count,
                                     uint64_t seed, int use_cholesky, double* out);
/* Left-point sum of f dg over a common grid of `count` samples. */
LRDH_API lrdh_status lrdh_young_integral(const double* f, const double* g, size_t count,
                                         double start, double step, double* out);
LRDH_API lrdh_status lrdh_wasserstein2(const double* a, size_t na, const double* b,
                                       size_t nb, uint64_t seed, double* out);

#ifdef __cplusplus
}
#endif

#endif /* LRDH_LRDH_H */
