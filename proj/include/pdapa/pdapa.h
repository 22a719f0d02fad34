/* pdapa: multi-task partial-diffusion affine projection simulator and
 * analytical performance engine, exposed as a C shared-library API.
 *
 * Handles are opaque; every function that can fail returns a pdapa_status.
 * A failing call leaves a human-readable message in pdapa_last_error()
 * (thread local). Results stay valid until freed, including the const char*
 * returned by pdapa_result_summary().
 */
#ifndef PDAPA_H
#define PDAPA_H

#include <stdint.h>

#if defined(_WIN32)
#define PDAPA_API __declspec(dllexport)
#else
#define PDAPA_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum pdapa_status {
  PDAPA_OK = 0,
  PDAPA_ERR_INVALID_ARG = 1,
  PDAPA_ERR_CONFIG_NOT_FOUND = 2,
  PDAPA_ERR_CONFIG_PARSE = 3,
  PDAPA_ERR_CONFIG_INVALID = 4,
  PDAPA_ERR_UNSTABLE = 5,      /* predicted or universal simulated divergence */
  PDAPA_ERR_CAP_EXCEEDED = 6,  /* theory dimension cap exceeded */
  PDAPA_ERR_IO = 7,
  PDAPA_ERR_INTERNAL = 8
} pdapa_status;

typedef struct pdapa_experiment pdapa_experiment;
typedef struct pdapa_result pdapa_result;

PDAPA_API const char* pdapa_version(void);
PDAPA_API const char* pdapa_status_name(pdapa_status status);
PDAPA_API const char* pdapa_last_error(void);

/* Experiment construction from the plain-text config grammar. */
PDAPA_API pdapa_status pdapa_experiment_load(const char* path,
                                             pdapa_experiment** out);
PDAPA_API pdapa_status pdapa_experiment_parse(const char* text,
                                              pdapa_experiment** out);
PDAPA_API void pdapa_experiment_free(pdapa_experiment* experiment);

/* Command-line style overrides. */
PDAPA_API pdapa_status pdapa_experiment_set_seed(pdapa_experiment* experiment,
                                                 uint64_t seed);
PDAPA_API pdapa_status pdapa_experiment_set_runs(pdapa_experiment* experiment,
                                                 int runs);
PDAPA_API pdapa_status pdapa_experiment_set_jobs(pdapa_experiment* experiment,
                                                 int jobs);

/* Pipelines. On PDAPA_ERR_UNSTABLE the result is still produced so callers
 * can write the diagnostic outputs; any other error leaves *out null. */
PDAPA_API pdapa_status pdapa_simulate(const pdapa_experiment* experiment,
                                      pdapa_result** out);
PDAPA_API pdapa_status pdapa_theory(const pdapa_experiment* experiment,
                                    pdapa_result** out);
PDAPA_API pdapa_status pdapa_compare(const pdapa_experiment* experiment,
                                     pdapa_result** out);
PDAPA_API void pdapa_result_free(pdapa_result* result);

/* Writes the result's files (CSV curves and/or JSON reports) into out_dir. */
PDAPA_API pdapa_status pdapa_result_write(const pdapa_result* result,
                                          const char* out_dir);
PDAPA_API const char* pdapa_result_summary(const pdapa_result* result);

/* Curve access: length of the averaged learning curve and its dB values. */
PDAPA_API pdapa_status pdapa_result_curve_length(const pdapa_result* result,
                                                 int* out);
PDAPA_API pdapa_status pdapa_result_nmsd_db(const pdapa_result* result,
                                            double* buffer, int capacity);

/* Named scalar metrics; see the README for the key list. */
PDAPA_API pdapa_status pdapa_result_scalar(const pdapa_result* result,
                                           const char* key, double* out);

/* Built-in invariant suite; returns PDAPA_OK also when checks fail, the
 * counts tell the story. */
PDAPA_API pdapa_status pdapa_selftest(int* checks, int* failures);

#ifdef __cplusplus
}
#endif

#endif /* PDAPA_H */
