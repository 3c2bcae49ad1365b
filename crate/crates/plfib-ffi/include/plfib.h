#ifndef PLFIB_H
#define PLFIB_H

/* Generated by cbindgen from plfib-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes of the C interface.
 */
typedef enum PlfibStatus {
  PLFIB_STATUS_OK = 0,
  PLFIB_STATUS_INVALID_PARAMETER = 1,
  PLFIB_STATUS_DEPTH_EXCEEDED = 2,
  PLFIB_STATUS_OUTSIDE_DOMAIN = 3,
  PLFIB_STATUS_BOUNDARY_POINT = 4,
  PLFIB_STATUS_NO_CONVERGENCE = 5,
  PLFIB_STATUS_PRECISION_EXHAUSTED = 6,
  PLFIB_STATUS_NULL_POINTER = 7,
  PLFIB_STATUS_OTHER_ERROR = 8,
} PlfibStatus;

/**
 * Attractor regime codes.
 */
typedef enum PlfibRegime {
  PLFIB_REGIME_ACIP = 0,
  PLFIB_REGIME_SIGMA_FINITE_INFINITE = 1,
  PLFIB_REGIME_WILD_ATTRACTOR = 2,
} PlfibRegime;

/**
 * Opaque handle to a built map.
 */
typedef struct PlfibMap PlfibMap;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Build a Fibonacci-family map with the given parameter and branch depth.
 * On success writes a heap pointer to `out`; free it with `plfib_map_free`.
 *
 * # Safety
 * `out` must be a valid pointer to writable memory for one pointer.
 */
enum PlfibStatus plfib_map_new(double lambda, uintptr_t depth, struct PlfibMap **out);

/**
 * Release a map handle. A null pointer is a no-op.
 *
 * # Safety
 * `map` must be null or a pointer previously returned by `plfib_map_new`
 * that has not been freed.
 */
void plfib_map_free(struct PlfibMap *map);

/**
 * Evaluate the unimodal map f at x in [0, 1].
 *
 * # Safety
 * `map` must be a live handle from `plfib_map_new`; `out` must be writable.
 */
enum PlfibStatus plfib_map_eval_f(const struct PlfibMap *map, double x, double *out);

/**
 * Evaluate the induced map F through its affine branch; also reports the
 * branch index.
 *
 * # Safety
 * `map` must be a live handle; `out_value` and `out_branch` must be
 * writable (either may be null to skip that output).
 */
enum PlfibStatus plfib_map_eval_induced(const struct PlfibMap *map,
                                        double x,
                                        double *out_value,
                                        uintptr_t *out_branch);

/**
 * Critical order of the family at lambda.
 */
double plfib_critical_order(double lambda);

/**
 * Hyperbolic dimension of the family at lambda.
 */
double plfib_hyperbolic_dimension(double lambda);

/**
 * Drift of the induced random walk at lambda.
 */
double plfib_drift(double lambda);

/**
 * Classify the attractor regime at lambda.
 *
 * # Safety
 * `out` must be writable.
 */
enum PlfibStatus plfib_classify(double lambda, enum PlfibRegime *out);

/**
 * Solve the pressure at (lambda, t) with the given mantissa width
 * (53, 113 or 256). Writes p and log(p) (log is -inf when p = 0).
 *
 * # Safety
 * `out_p` and `out_log_p` must be writable (either may be null).
 */
enum PlfibStatus plfib_solve_pressure(double lambda,
                                      double t,
                                      uint32_t precision_bits,
                                      double *out_p,
                                      double *out_log_p);

/**
 * Transition parameter t1 of the pressure function.
 */
double plfib_t1(double lambda);

/**
 * Run a walk simulation and report the escape fraction.
 *
 * # Safety
 * `out_escape_fraction` must be writable.
 */
enum PlfibStatus plfib_simulate_escape_fraction(double lambda,
                                                uintptr_t n_walkers,
                                                uintptr_t n_steps,
                                                uint64_t seed,
                                                uintptr_t threshold,
                                                double *out_escape_fraction);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PLFIB_H */
