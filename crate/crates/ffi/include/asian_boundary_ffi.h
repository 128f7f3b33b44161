#ifndef ASIAN_BOUNDARY_FFI_H
#define ASIAN_BOUNDARY_FFI_H

/* Generated with cbindgen:0.29.4 */

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define AB_AVERAGING_ARITHMETIC 0

#define AB_AVERAGING_GEOMETRIC 1

#define AB_AVERAGING_WEIGHTED 2

#define AB_KIND_CALL 0

#define AB_KIND_PUT 1

typedef enum AbStatus {
  AB_STATUS_OK = 0,
  AB_STATUS_NULL_POINTER = 1,
  AB_STATUS_INVALID_ARGUMENT = 2,
  AB_STATUS_DOMAIN = 3,
  AB_STATUS_UNSUPPORTED = 4,
  AB_STATUS_NO_CONVERGENCE = 5,
  AB_STATUS_NUMERICAL = 6,
  AB_STATUS_BUFFER_TOO_SMALL = 7,
  AB_STATUS_PANIC = 8,
} AbStatus;

/**
 * Opaque early exercise boundary.
 */
typedef struct AbBoundary AbBoundary;

typedef struct AbParams {
  double r;
  double q;
  double sigma;
  double maturity;
} AbParams;

/**
 * `method` is one of the `AB_AVERAGING_*` constants; `lambda` is read only
 * for weighted averaging.
 */
typedef struct AbAveraging {
  int32_t method;
  double lambda;
} AbAveraging;

typedef struct AbGrid {
  size_t n;
  size_t m;
  double domain_length;
} AbGrid;

typedef struct AbPrice {
  double european;
  double premium;
  double total;
} AbPrice;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *ab_version(void);

/**
 * Message of the last failed call on this thread (empty after a success).
 * The pointer stays valid until the next library call on the same thread.
 */
const char *ab_last_error(void);

/**
 * Slope constant `h*` of the near-expiry boundary expansion.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum AbStatus ab_h_star(double *out);

/**
 * Boundary position `x*_T` at expiry.
 *
 * # Safety
 * Pointers must be valid.
 */
enum AbStatus ab_expiry_limit(const struct AbParams *params,
                              const struct AbAveraging *avg,
                              int32_t option_kind,
                              double *out);

/**
 * European part `e^{-qT} E_t[(rho (1 - x_T))^+]` at state `(t, x)`.
 *
 * # Safety
 * Pointers must be valid.
 */
enum AbStatus ab_european_value(const struct AbParams *params,
                                const struct AbAveraging *avg,
                                int32_t option_kind,
                                double t,
                                double x,
                                double *out);

/**
 * Solves for the call boundary with the front-fixing scheme. On success
 * `*out` receives a handle owned by the caller.
 *
 * # Safety
 * Pointers must be valid; `out` must be valid for writes.
 */
enum AbStatus ab_boundary_solve(const struct AbParams *params,
                                const struct AbAveraging *avg,
                                const struct AbGrid *grid,
                                struct AbBoundary **out);

/**
 * Releases a handle; null is ignored.
 *
 * # Safety
 * `handle` must be null or come from [`ab_boundary_solve`] and not be
 * freed twice.
 */
void ab_boundary_free(struct AbBoundary *handle);

/**
 * Number of boundary nodes.
 *
 * # Safety
 * Pointers must be valid.
 */
enum AbStatus ab_boundary_len(const struct AbBoundary *handle, size_t *out);

/**
 * Copies node times `t` and values `x*_t` in increasing `t`. Fails with
 * `BUFFER_TOO_SMALL` when `capacity` is below the node count.
 *
 * # Safety
 * `t_out` and `x_out` must be valid for `capacity` writes.
 */
enum AbStatus ab_boundary_copy(const struct AbBoundary *handle,
                               double *t_out,
                               double *x_out,
                               size_t capacity);

/**
 * `x*_t`, linear between nodes.
 *
 * # Safety
 * Pointers must be valid.
 */
enum AbStatus ab_boundary_x_star(const struct AbBoundary *handle, double t, double *out);

/**
 * Smallest boundary value and its time.
 *
 * # Safety
 * Pointers must be valid.
 */
enum AbStatus ab_boundary_min(const struct AbBoundary *handle, double *t_out, double *x_out);

/**
 * Value decomposition at `(t, x)` using the boundary in `handle`.
 *
 * # Safety
 * Pointers must be valid.
 */
enum AbStatus ab_price(const struct AbBoundary *handle,
                       const struct AbParams *params,
                       const struct AbAveraging *avg,
                       int32_t option_kind,
                       double t,
                       double x,
                       struct AbPrice *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ASIAN_BOUNDARY_FFI_H */
