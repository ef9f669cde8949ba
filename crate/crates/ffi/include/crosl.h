#ifndef CROSL_H
#define CROSL_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

/**
 * Result codes.
 */
typedef enum CroslStatus {
  CROSL_STATUS_OK = 0,
  CROSL_STATUS_NULL_POINTER = 1,
  CROSL_STATUS_INVALID_ARGUMENT = 2,
  CROSL_STATUS_CONFIG = 3,
  CROSL_STATUS_STATE = 4,
  CROSL_STATUS_BUDGET_EXHAUSTED = 5,
  CROSL_STATUS_IO = 6,
  /**
   * Output buffer too small; the required length was written.
   */
  CROSL_STATUS_BUFFER_TOO_SMALL = 7,
  CROSL_STATUS_PANIC = 8,
} CroslStatus;

/**
 * Opaque optimizer handle.
 */
typedef struct CroslOptimizer CroslOptimizer;

/**
 * Statistics of one generation.
 */
typedef struct CroslGenerationStats {
  uint64_t generation;
  double best;
  double mean;
  uint64_t evaluations;
  uint64_t occupied;
  bool budget_exhausted;
} CroslGenerationStats;

/**
 * Best, mean and population standard deviation of final fitness values.
 */
typedef struct CroslSummary {
  double best;
  double mean;
  double std;
} CroslSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. The pointer stays
 * valid until the next failing call on the same thread.
 */
const char *crosl_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *crosl_version(void);

/**
 * Evaluates benchmark `id` ("F1".."F15") at the `n` values of `x`.
 *
 * # Safety
 * `id` must be a NUL-terminated string, `x` must point to `n` doubles and
 * `out` to writable storage for one double.
 */
enum CroslStatus crosl_benchmark_eval(const char *id, const double *x, size_t n, double *out);

/**
 * Output (MW) of the 3.35 MW reference turbine at wind speed `v` (m/s).
 *
 * # Safety
 * `out` must point to writable storage for one double.
 */
enum CroslStatus crosl_power_curve(double v, double *out);

/**
 * Annual energy production (MWh) of `n_turbines` turbines at interleaved
 * coordinates `xy` (x0, y0, x1, y1, ...) under the default 16-bin rose.
 *
 * # Safety
 * `xy` must point to `2 * n_turbines` doubles and `out` to writable storage
 * for one double.
 */
enum CroslStatus crosl_windfarm_aep(const double *xy, size_t n_turbines, double *out);

/**
 * Builds an optimizer from an experiment config (JSON). The config's budget,
 * objective, substrates and variant are used; repetitions are ignored.
 *
 * # Safety
 * `config_json` must be a NUL-terminated string and `out` must point to
 * writable storage for one handle.
 */
enum CroslStatus crosl_optimizer_new(const char *config_json,
                                     uint64_t seed,
                                     struct CroslOptimizer **out);

/**
 * Releases a handle. NULL is ignored.
 *
 * # Safety
 * `handle` must come from [`crosl_optimizer_new`] and not be used afterwards.
 */
void crosl_optimizer_free(struct CroslOptimizer *handle);

/**
 * Runs one generation. Returns `CROSL_STATUS_BUDGET_EXHAUSTED` once the
 * budget is spent. `stats` may be NULL.
 *
 * # Safety
 * `handle` must be a live handle; `stats`, if not NULL, must be writable.
 */
enum CroslStatus crosl_optimizer_step(struct CroslOptimizer *handle,
                                      struct CroslGenerationStats *stats);

/**
 * Copies the best genome into `genome` (capacity `capacity`) and its fitness
 * into `fitness`. The genome length is written to `len` when not NULL.
 *
 * # Safety
 * `handle` must be live; `genome` must hold `capacity` doubles; `fitness`
 * and `len` must be writable or NULL.
 */
enum CroslStatus crosl_optimizer_best(struct CroslOptimizer *handle,
                                      double *genome,
                                      size_t capacity,
                                      double *fitness,
                                      size_t *len);

/**
 * Copies the current substrate probabilities.
 *
 * # Safety
 * Same contract as [`crosl_optimizer_best`].
 */
enum CroslStatus crosl_optimizer_probabilities(struct CroslOptimizer *handle,
                                               double *out,
                                               size_t capacity,
                                               size_t *len);

/**
 * Total objective evaluations so far.
 *
 * # Safety
 * `handle` must be live and `out` writable.
 */
enum CroslStatus crosl_optimizer_evaluations(struct CroslOptimizer *handle, uint64_t *out);

/**
 * Runs a full experiment; writes CSV output into `out_dir` when it is not
 * NULL and the summary into `summary` when it is not NULL.
 *
 * # Safety
 * `config_json` and `out_dir` must be NUL-terminated strings (or NULL for
 * `out_dir`); `summary` must be writable or NULL.
 */
enum CroslStatus crosl_run_experiment(const char *config_json,
                                      const char *out_dir,
                                      struct CroslSummary *summary);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CROSL_H */
