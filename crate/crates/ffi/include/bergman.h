#ifndef BERGMAN_H
#define BERGMAN_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes.
 */
typedef enum BgStatus {
  BG_STATUS_OK = 0,
  BG_STATUS_NULL_POINTER = 1,
  BG_STATUS_INVALID_ARGUMENT = 2,
  BG_STATUS_INVALID_DOMAIN = 3,
  BG_STATUS_NOT_INTERIOR = 4,
  BG_STATUS_UNSUPPORTED = 5,
  BG_STATUS_NUMERICAL = 6,
  BG_STATUS_PANIC = 7,
} BgStatus;

typedef enum BgBackend {
  BG_BACKEND_AUTO = 0,
  BG_BACKEND_CLOSED = 1,
  BG_BACKEND_NUMERIC = 2,
} BgBackend;

/**
 * Opaque domain handle.
 */
typedef struct BgDomain BgDomain;

/**
 * Opaque estimator handle.
 */
typedef struct BgEstimator BgEstimator;

typedef struct BgComplex {
  double re;
  double im;
} BgComplex;

/**
 * Kernel, extremal derivative and metric at one `(z, X)`.
 */
typedef struct BgMetric {
  double k;
  double m;
  double b;
  /**
   * Quadrature standard errors; zero for closed forms and exact rules.
   */
  double k_error;
  double b_error;
  /**
   * 1 when numeric parts agree between degrees `d - 2` and `d`.
   */
  int32_t converged;
  /**
   * Basis degree of numeric parts, or -1 for closed forms.
   */
  int32_t degree;
} BgMetric;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. Valid until the next call.
 */
const char *bg_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *bg_version(void);

/**
 * Parses a JSON domain description.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum BgStatus bg_domain_from_json(const char *json, struct BgDomain **out);

/**
 * # Safety
 * `d` must come from `bg_domain_from_json` and not be used afterwards. Null is ignored.
 */
void bg_domain_free(struct BgDomain *d);

/**
 * Complex dimension, or 0 for a null handle.
 *
 * # Safety
 * `d` must be null or a live domain handle.
 */
size_t bg_domain_dim(const struct BgDomain *d);

/**
 * Euclidean distance from an interior point to the boundary.
 *
 * # Safety
 * `z` must point to `n` values and `out` must be writable.
 */
enum BgStatus bg_domain_boundary_distance(const struct BgDomain *d,
                                          const struct BgComplex *z,
                                          size_t n,
                                          double *out);

/**
 * Largest `r` with `z + lambda X` inside for `|lambda| < r` (infinite when unbounded).
 *
 * # Safety
 * `z` and `x` must point to `n` values and `out` must be writable.
 */
enum BgStatus bg_domain_directional_radius(const struct BgDomain *d,
                                           const struct BgComplex *z,
                                           const struct BgComplex *x,
                                           size_t n,
                                           double *out);

/**
 * Closed-form kernel `K(z)`.
 *
 * # Safety
 * `z` must point to `n` values and `out` must be writable.
 */
enum BgStatus bg_kernel_closed(const struct BgDomain *d,
                               const struct BgComplex *z,
                               size_t n,
                               double *out);

/**
 * Closed-form `K`, `M` and `B`.
 *
 * # Safety
 * `z` and `x` must point to `n` values and `out` must be writable.
 */
enum BgStatus bg_metric_closed(const struct BgDomain *d,
                               const struct BgComplex *z,
                               const struct BgComplex *x,
                               size_t n,
                               struct BgMetric *out);

/**
 * Builds an estimator. `degree < 0` selects the dimension cap, `candidates == 0`
 * the default qmc budget. The domain handle may be freed afterwards.
 *
 * # Safety
 * `d` must be a live domain handle and `out` writable.
 */
enum BgStatus bg_estimator_new(const struct BgDomain *d,
                               enum BgBackend backend,
                               int32_t degree,
                               size_t candidates,
                               uint64_t seed,
                               struct BgEstimator **out);

/**
 * `K`, `M`, `B` at `(z, X)`. Safe to call concurrently on one handle.
 *
 * # Safety
 * `z` and `x` must point to `n` values and `out` must be writable.
 */
enum BgStatus bg_estimator_metric(const struct BgEstimator *e,
                                  const struct BgComplex *z,
                                  const struct BgComplex *x,
                                  size_t n,
                                  struct BgMetric *out);

/**
 * # Safety
 * `e` must come from `bg_estimator_new` and not be used afterwards. Null is ignored.
 */
void bg_estimator_free(struct BgEstimator *e);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BERGMAN_H */
