#ifndef MATHIEU_FLOQUET_H
#define MATHIEU_FLOQUET_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Values accepted for the `branch` argument of [`mf_periodic_part`].
 */
typedef enum MfBranch {
  MF_BRANCH_MAX = 0,
  MF_BRANCH_MIN = 1,
} MfBranch;

/**
 * Status codes returned by every fallible function.
 */
typedef enum MfStatus {
  MF_STATUS_OK = 0,
  MF_STATUS_NULL_POINTER = 1,
  MF_STATUS_INVALID_PARAMS = 2,
  MF_STATUS_INVALID_CONFIG = 3,
  MF_STATUS_STIFFNESS_GUARD = 4,
  MF_STATUS_INTEGRATION_FAILED = 5,
  MF_STATUS_COMPLEX_MULTIPLIERS = 6,
  MF_STATUS_NEGATIVE_MULTIPLIER = 7,
  MF_STATUS_NON_PERIODIC = 8,
  MF_STATUS_NO_CONVERGENCE = 9,
  MF_STATUS_DOMAIN_ERROR = 10,
  MF_STATUS_TURNING_POINT = 11,
  MF_STATUS_BUFFER_TOO_SMALL = 12,
  MF_STATUS_PANIC = 13,
  MF_STATUS_OTHER = 14,
} MfStatus;

/**
 * Monodromy matrix with its multipliers and exponents.
 */
typedef struct MfFloquet MfFloquet;

/**
 * Physical parameters `(m, gamma, epsilon, omega)`.
 */
typedef struct MfParams MfParams;

/**
 * Sampled periodic part of a Floquet solution.
 */
typedef struct MfPeriodic MfPeriodic;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on this thread, or NULL. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *mf_last_error_message(void);

/**
 * Validates and stores parameters. `wkb_valid` is not required.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum MfStatus mf_params_new(double m,
                            double gamma,
                            double epsilon,
                            double omega,
                            struct MfParams **out);

/**
 * # Safety
 * `params` must be NULL or a handle from [`mf_params_new`] not yet freed.
 */
void mf_params_free(struct MfParams *params);

/**
 * `gamma^2/4 > m |epsilon|`. False for a NULL handle.
 *
 * # Safety
 * `params` must be NULL or a live handle.
 */
bool mf_params_wkb_valid(const struct MfParams *params);

/**
 * Integrates over one period and extracts multipliers and exponents.
 * `rel_tol <= 0` selects the default tolerance; `stiff` switches to the
 * fixed-step implicit integrator.
 *
 * # Safety
 * `params` must be a live handle and `out` writable.
 */
enum MfStatus mf_floquet_compute(const struct MfParams *params,
                                 double rel_tol,
                                 bool stiff,
                                 struct MfFloquet **out);

/**
 * # Safety
 * `floquet` must be NULL or a live handle.
 */
void mf_floquet_free(struct MfFloquet *floquet);

/**
 * # Safety
 * `floquet` must be a live handle; the out-pointers must be writable.
 */
enum MfStatus mf_floquet_exponents(const struct MfFloquet *floquet,
                                   double *lambda_max,
                                   double *lambda_min);

/**
 * Writes the monodromy matrix row-major into `out[0..4]`.
 *
 * # Safety
 * `floquet` must be a live handle and `out` must have room for 4 doubles.
 */
enum MfStatus mf_floquet_monodromy(const struct MfFloquet *floquet, double *out);

/**
 * Writes `rho_1 >= rho_2` into `out[0..2]`.
 *
 * # Safety
 * `floquet` must be a live handle and `out` must have room for 2 doubles.
 */
enum MfStatus mf_floquet_multipliers(const struct MfFloquet *floquet, double *out);

/**
 * `ln det M` and `|det M e^{gamma T/m} - 1|`.
 *
 * # Safety
 * `floquet` must be a live handle; the out-pointers must be writable.
 */
enum MfStatus mf_floquet_abel(const struct MfFloquet *floquet, double *log_det, double *residual);

/**
 * Converged `Delta(0)`. `tol <= 0` selects the default tolerance.
 *
 * # Safety
 * `params` must be a live handle; the out-pointers must be writable.
 */
enum MfStatus mf_hill_delta0(const struct MfParams *params,
                             double tol,
                             double *delta0,
                             size_t *truncation_n);

/**
 * Exponents implied by `Delta(0)`. `tol <= 0` selects the default tolerance.
 *
 * # Safety
 * `params` must be a live handle; the out-pointers must be writable.
 */
enum MfStatus mf_hill_exponents(const struct MfParams *params,
                                double tol,
                                double *lambda_max,
                                double *lambda_min);

/**
 * Leading-order predictions `(-m epsilon^2/(2 gamma^3), -gamma/m)`.
 *
 * # Safety
 * `params` must be a live handle; the out-pointers must be writable.
 */
enum MfStatus mf_wkb_exponents(const struct MfParams *params,
                               double *lambda_max,
                               double *lambda_min);

/**
 * Samples the periodic part for `branch` (an [`MfBranch`] value) on
 * `grid_len` points.
 *
 * # Safety
 * `params` and `floquet` must be live handles and `out` writable.
 */
enum MfStatus mf_periodic_part(const struct MfParams *params,
                               const struct MfFloquet *floquet,
                               uint32_t branch,
                               size_t grid_len,
                               bool stiff,
                               struct MfPeriodic **out);

/**
 * Number of samples; 0 for a NULL handle.
 *
 * # Safety
 * `periodic` must be NULL or a live handle.
 */
size_t mf_periodic_len(const struct MfPeriodic *periodic);

/**
 * Copies the grid and samples into caller buffers of length `len`, which
 * must be at least [`mf_periodic_len`]. Either buffer may be NULL to skip
 * it.
 *
 * # Safety
 * `periodic` must be a live handle; non-NULL buffers must hold `len` doubles.
 */
enum MfStatus mf_periodic_copy(const struct MfPeriodic *periodic,
                               double *grid,
                               double *values,
                               size_t len,
                               double *normalization);

/**
 * # Safety
 * `periodic` must be NULL or a live handle.
 */
void mf_periodic_free(struct MfPeriodic *periodic);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MATHIEU_FLOQUET_H */
