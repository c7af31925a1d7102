/*
 * dasgp C API.
 *
 * Opaque handles own their resources; every *_create / *_load call has a
 * matching *_destroy. Functions return DASGP_OK on success, otherwise an
 * error code whose message is available from dasgp_last_error() on the same
 * thread until the next failing call.
 */
#ifndef DASGP_DASGP_H
#define DASGP_DASGP_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(DASGP_BUILDING_LIBRARY)
#define DASGP_API __declspec(dllexport)
#else
#define DASGP_API __declspec(dllimport)
#endif
#else
#define DASGP_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum dasgp_status {
  DASGP_OK = 0,
  DASGP_ERR_INVALID_ARGUMENT = 1,
  DASGP_ERR_DIMENSION_MISMATCH = 2,
  DASGP_ERR_NON_FINITE = 3,
  DASGP_ERR_NUMERICAL = 4,
  DASGP_ERR_EMPTY_SELECTION = 5,
  DASGP_ERR_IO = 6,
  DASGP_ERR_PARSE = 7,
  DASGP_ERR_INTERNAL = 99
} dasgp_status;

typedef enum dasgp_field_kind {
  DASGP_FIELD_1D = 0,
  DASGP_FIELD_2D = 1,
  DASGP_FIELD_RANDOM_SINUSOID = 2
} dasgp_field_kind;

typedef enum dasgp_policy {
  DASGP_POLICY_MAX_VARIANCE = 0,
  DASGP_POLICY_RANDOM = 1
} dasgp_policy;

typedef enum dasgp_format { DASGP_FORMAT_CSV = 0, DASGP_FORMAT_JSON = 1 } dasgp_format;

typedef struct dasgp_config dasgp_config;
typedef struct dasgp_result dasgp_result;
typedef struct dasgp_field dasgp_field;

typedef struct dasgp_record {
  uint64_t seed;
  size_t round;
  const char* metric; /* owned by the result handle */
  double value;
  const char* extra;  /* owned by the result handle */
} dasgp_record;

DASGP_API const char* dasgp_version(void);
DASGP_API const char* dasgp_last_error(void);

/* ---- experiment configuration ---------------------------------------- */

DASGP_API dasgp_status dasgp_config_create(dasgp_config** out);
DASGP_API dasgp_status dasgp_config_from_preset(const char* name, dasgp_config** out);
/* Applies every key = value line of the file on top of `cfg`. */
DASGP_API dasgp_status dasgp_config_load_file(dasgp_config* cfg, const char* path);
DASGP_API dasgp_status dasgp_config_set(dasgp_config* cfg, const char* key, const char* value);
DASGP_API dasgp_status dasgp_config_validate(const dasgp_config* cfg);
/* Experiment name ("das-1d", ..., "aloha"); valid while `cfg` lives. */
DASGP_API const char* dasgp_config_experiment(const dasgp_config* cfg);
/* Configured output path and format ("" when unset). */
DASGP_API const char* dasgp_config_output_path(const dasgp_config* cfg);
DASGP_API dasgp_format dasgp_config_output_format(const dasgp_config* cfg);
/* 1 when output files should carry a generation timestamp. */
DASGP_API int dasgp_config_timestamp(const dasgp_config* cfg);
DASGP_API void dasgp_config_destroy(dasgp_config* cfg);

/* ---- running and results ---------------------------------------------- */

DASGP_API dasgp_status dasgp_run(const dasgp_config* cfg, dasgp_result** out);
DASGP_API size_t dasgp_result_record_count(const dasgp_result* result);
DASGP_API dasgp_status dasgp_result_record(const dasgp_result* result, size_t index,
                                           dasgp_record* out);
DASGP_API size_t dasgp_result_aggregate_count(const dasgp_result* result);
DASGP_API size_t dasgp_result_failure_count(const dasgp_result* result);
/* Seed and message of a failed seed; the message is owned by `result`. */
DASGP_API dasgp_status dasgp_result_failure(const dasgp_result* result, size_t index,
                                            uint64_t* seed, const char** message);
/* Writes records to `path` and per-round aggregates to `path`.agg. */
DASGP_API dasgp_status dasgp_result_write(const dasgp_result* result, dasgp_format format,
                                          const char* path, int timestamp);
/* Records as CSV text; the pointer stays valid until the result is destroyed. */
DASGP_API const char* dasgp_result_csv(dasgp_result* result);
DASGP_API void dasgp_result_destroy(dasgp_result* result);

/* ---- sensor fields ---------------------------------------------------- */

DASGP_API dasgp_status dasgp_field_generate(dasgp_field_kind kind, size_t sensors,
                                            double noise_variance, uint64_t seed,
                                            dasgp_field** out);
DASGP_API dasgp_status dasgp_field_load_csv(const char* path, double noise_variance,
                                            dasgp_field** out);
DASGP_API size_t dasgp_field_size(const dasgp_field* field);
DASGP_API size_t dasgp_field_dim(const dasgp_field* field);
/* coords must hold dasgp_field_dim() values. */
DASGP_API dasgp_status dasgp_field_sensor(const dasgp_field* field, size_t index,
                                          double* coords, double* true_mean,
                                          double* measurement);
DASGP_API void dasgp_field_destroy(dasgp_field* field);

/* Runs `rounds` DAS rounds; mse and selected must hold `rounds` entries. */
DASGP_API dasgp_status dasgp_das_run(const dasgp_field* field, dasgp_policy policy,
                                     size_t rounds, double length_scale,
                                     double signal_variance, uint64_t seed, double* mse,
                                     size_t* selected);

/* ---- numerical primitives --------------------------------------------- */

/*
 * Gaussian process posterior. Coordinates are row-major (n x dim).
 * mean must hold n_targets values; cov may be NULL or hold n_targets^2.
 */
DASGP_API dasgp_status dasgp_posterior(size_t dim, size_t n_observed,
                                       const double* observed_coords,
                                       const double* observed_values, size_t n_targets,
                                       const double* target_coords, double length_scale,
                                       double signal_variance, double noise_variance,
                                       double* mean, double* cov);

DASGP_API double dasgp_expected_throughput(double p_up, size_t channels, size_t candidates);
DASGP_API dasgp_status dasgp_success_probabilities(const double* p, size_t n, size_t channels,
                                                   double* out);
DASGP_API double dasgp_upload_probability(double error_sq, double psi);
DASGP_API double dasgp_sse_lower_bound(double noise_variance, size_t candidates,
                                       size_t channels);

#ifdef __cplusplus
}
#endif

#endif /* DASGP_DASGP_H */
