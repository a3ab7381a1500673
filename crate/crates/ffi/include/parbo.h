#ifndef PARBO_H
#define PARBO_H

/* Generated with cbindgen:0.29.4 */

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every call.
 */
typedef enum {
  PARBO_STATUS_OK = 0,
  PARBO_STATUS_NULL_POINTER = 1,
  PARBO_STATUS_INVALID_ARGUMENT = 2,
  PARBO_STATUS_UNKNOWN_PROBLEM = 3,
  PARBO_STATUS_EVALUATION_FAILED = 4,
  PARBO_STATUS_INDEX_OUT_OF_RANGE = 5,
  PARBO_STATUS_INTERNAL = 6,
  PARBO_STATUS_PANIC = 7,
} ParboStatus;

/**
 * A benchmark problem from the registry.
 */
typedef struct ParboProblem ParboProblem;

/**
 * Outcome of [`parbo_optimize`]: the evaluated data and its Pareto front.
 */
typedef struct ParboResult ParboResult;

/**
 * Settings of [`parbo_optimize`].
 */
typedef struct {
  size_t n_seq;
  size_t n_initial;
  /**
   * Total evaluations including the initial sample.
   */
  size_t max_evaluations;
  uint64_t seed;
  double w_opt;
  double w_con;
  double w_exp;
  double gamma;
  double sigma_ref;
  double epsilon;
  /**
   * 0: Gaussian process (Matérn 5/2), 1: Bayesian polynomial ridge.
   */
  int32_t regressor;
  /**
   * 0: SVM with Platt scaling, 1: Laplace GP classifier.
   */
  int32_t classifier;
} ParboOptions;

/**
 * Black-box callback. Writes `n_obj` objectives to `y` and returns 1 when
 * `x` is feasible, 0 when infeasible (then `y` is ignored) and a negative
 * value on failure, which aborts the run.
 */
typedef int32_t (*ParboEvaluateFn)(void *user_data,
                                   const double *x,
                                   size_t dim,
                                   double *y,
                                   size_t n_obj);

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the last failed call on this thread; empty after a
 * successful call. Valid until the next call on the same thread.
 */
const char *parbo_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *parbo_version(void);

/**
 * Dominated hypervolume of `n_points` row-major objective vectors.
 *
 * # Safety
 * `points` holds `n_points * n_obj` values, `reference` holds `n_obj`.
 */
ParboStatus parbo_hypervolume(const double *points,
                              size_t n_points,
                              size_t n_obj,
                              const double *reference,
                              double *out);

/**
 * Closed-form expected hypervolume improvement of a normal prediction.
 *
 * # Safety
 * `front` holds `n_points * n_obj` values; `reference`, `mu`, `sigma` hold `n_obj`.
 */
ParboStatus parbo_evi(const double *front,
                      size_t n_points,
                      size_t n_obj,
                      const double *reference,
                      const double *mu,
                      const double *sigma,
                      double *out);

/**
 * EVI restricted to sectors meeting the `sigma_ref` ellipsoid.
 *
 * # Safety
 * As [`parbo_evi`].
 */
ParboStatus parbo_evi_truncated(const double *front,
                                size_t n_points,
                                size_t n_obj,
                                const double *reference,
                                const double *mu,
                                const double *sigma,
                                double sigma_ref,
                                double *out);

/**
 * Probability that a prediction is not dominated by any point of `front`.
 *
 * # Safety
 * `front` holds `n_points * n_obj` values; `mu`, `sigma` hold `n_obj`.
 */
ParboStatus parbo_p_nondominated(const double *front,
                                 size_t n_points,
                                 size_t n_obj,
                                 const double *mu,
                                 const double *sigma,
                                 double *out);

/**
 * Looks up a problem by name (case-insensitive).
 *
 * # Safety
 * `name` is a NUL-terminated string; `out` is writable.
 */
ParboStatus parbo_problem_new(const char *name, ParboProblem **out);

/**
 * # Safety
 * `problem` comes from [`parbo_problem_new`] and is not used afterwards. Null is ignored.
 */
void parbo_problem_free(ParboProblem *problem);

/**
 * Design dimension and number of objectives.
 *
 * # Safety
 * `problem` is a live handle; the out-pointers are writable.
 */
ParboStatus parbo_problem_dims(const ParboProblem *problem, size_t *dim, size_t *n_obj);

/**
 * Lower and upper bounds of the design space.
 *
 * # Safety
 * `lower` and `upper` each hold `dim` writable values.
 */
ParboStatus parbo_problem_bounds(const ParboProblem *problem, double *lower, double *upper);

/**
 * Evaluates a design: writes the objectives to `y` and 1 (feasible) or 0 to
 * `feasible`. Objectives are written for infeasible designs too.
 *
 * # Safety
 * `x` holds `dim` values, `y` has room for `n_obj`.
 */
ParboStatus parbo_problem_evaluate(const ParboProblem *problem,
                                   const double *x,
                                   double *y,
                                   int32_t *feasible);

/**
 * Generic defaults: all three acquisition terms weighted equally.
 *
 * # Safety
 * `out` is writable.
 */
ParboStatus parbo_options_default(ParboOptions *out);

/**
 * The tuned settings of a registry problem.
 *
 * # Safety
 * `problem` is a live handle; `out` is writable.
 */
ParboStatus parbo_options_for_problem(const ParboProblem *problem, ParboOptions *out);

/**
 * Runs the adaptive optimizer on a callback black box. Initial samples are
 * drawn uniformly from the full bounds.
 *
 * # Safety
 * `lower`, `upper` hold `dim` values; `reference` holds `n_obj`; `options`
 * is readable; `callback` is safe to call with `user_data`; `out` is writable.
 */
ParboStatus parbo_optimize(const double *lower,
                           const double *upper,
                           size_t dim,
                           size_t n_obj,
                           const double *reference,
                           const ParboOptions *options,
                           ParboEvaluateFn callback,
                           void *user_data,
                           ParboResult **out);

/**
 * # Safety
 * `result` comes from [`parbo_optimize`] and is not used afterwards. Null is ignored.
 */
void parbo_result_free(ParboResult *result);

/**
 * Number of evaluated designs and number of Pareto-optimal ones.
 *
 * # Safety
 * `result` is a live handle; the out-pointers are writable.
 */
ParboStatus parbo_result_sizes(const ParboResult *result, size_t *n_evaluations, size_t *front_len);

/**
 * The `index`-th Pareto-optimal design and its objectives.
 *
 * # Safety
 * `x` has room for `dim` values, `y` for `n_obj`.
 */
ParboStatus parbo_result_front_point(const ParboResult *result, size_t index, double *x, double *y);

/**
 * The `index`-th evaluated design in evaluation order. `y` is left
 * untouched for infeasible designs; `feasible` may be null.
 *
 * # Safety
 * `x` has room for `dim` values, `y` for `n_obj`.
 */
ParboStatus parbo_result_sample(const ParboResult *result,
                                size_t index,
                                double *x,
                                double *y,
                                int32_t *feasible);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PARBO_H */
