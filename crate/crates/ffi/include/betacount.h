#ifndef BETACOUNT_H
#define BETACOUNT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes. `BC_STATUS_OK` is zero; the rest mirror the library error kinds.
 */
typedef enum BcStatus {
  BC_STATUS_OK = 0,
  BC_STATUS_NULL_POINTER = 1,
  BC_STATUS_OUT_OF_RANGE = 2,
  BC_STATUS_INVALID_POLYNOMIAL = 3,
  BC_STATUS_BACKEND_MISMATCH = 4,
  BC_STATUS_POINT_OUTSIDE_INTERVAL = 5,
  BC_STATUS_DEPTH_EXCEEDED = 6,
  BC_STATUS_OUTPUT_TOO_LARGE = 7,
  BC_STATUS_PIECE_BUDGET_EXCEEDED = 8,
  BC_STATUS_SUPPORT_VIOLATION = 9,
  BC_STATUS_OMEGA_EXHAUSTED = 10,
  BC_STATUS_INVALID_PARAMS = 11,
  BC_STATUS_PANIC = 12,
} BcStatus;

/**
 * A validated base β.
 */
typedef struct BcBeta BcBeta;

/**
 * The density `f_n` as `f64` pieces.
 */
typedef struct BcDensity BcDensity;

/**
 * A point of `I_β` in the backend of the β it was made from.
 */
typedef struct BcPoint BcPoint;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread. The pointer stays valid
 * until the next failing call on the same thread.
 */
const char *bc_last_error_message(void);

/**
 * # Safety
 * `out` must be valid for writes.
 */
enum BcStatus bc_beta_new_float(double value, double tolerance, struct BcBeta **out);

/**
 * β with `β^2 = aβ + b`, computed exactly.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum BcStatus bc_beta_new_quadratic(int64_t a, int64_t b, struct BcBeta **out);

/**
 * # Safety
 * `beta` must come from `bc_beta_new_*` and not be freed twice. Null is a no-op.
 */
void bc_beta_free(struct BcBeta *beta);

/**
 * β as a double, or NaN for a null handle.
 *
 * # Safety
 * `beta` must be null or a live handle.
 */
double bc_beta_value(const struct BcBeta *beta);

/**
 * The double `x`, converted exactly to the backend of `beta`.
 *
 * # Safety
 * `beta` must be a live handle and `out` valid for writes.
 */
enum BcStatus bc_point_from_f64(const struct BcBeta *beta, double x, struct BcPoint **out);

/**
 * The point `p_num/p_den + (q_num/q_den)·β`.
 *
 * # Safety
 * `beta` must be a live handle and `out` valid for writes.
 */
enum BcStatus bc_point_from_parts(const struct BcBeta *beta,
                                  int64_t p_num,
                                  int64_t p_den,
                                  int64_t q_num,
                                  int64_t q_den,
                                  struct BcPoint **out);

/**
 * # Safety
 * `point` must come from `bc_point_from_*` and not be freed twice. Null is a no-op.
 */
void bc_point_free(struct BcPoint *point);

/**
 * # Safety
 * `point` must be null or a live handle.
 */
double bc_point_to_f64(const struct BcPoint *point);

/**
 * `N_n(x; β)` and whether any partial sum came within the tolerance of a
 * window endpoint. `n` is capped at 30 so the count fits in 64 bits.
 *
 * # Safety
 * Handles must be live; `count` and `near_boundary` valid for writes.
 */
enum BcStatus bc_count_prefixes(const struct BcBeta *beta,
                                const struct BcPoint *x,
                                uint32_t n,
                                uint64_t *count,
                                bool *near_boundary);

/**
 * `f_n = P^n((β-1)χ)` on `I_β`.
 *
 * # Safety
 * `beta` must be a live handle and `out` valid for writes.
 */
enum BcStatus bc_density_new(const struct BcBeta *beta, uint32_t n, struct BcDensity **out);

/**
 * # Safety
 * `density` must come from `bc_density_new` and not be freed twice. Null is a no-op.
 */
void bc_density_free(struct BcDensity *density);

/**
 * Number of pieces, or 0 for a null handle.
 *
 * # Safety
 * `density` must be null or a live handle.
 */
size_t bc_density_piece_count(const struct BcDensity *density);

/**
 * Piece `index` as `[left, right)` with its value.
 *
 * # Safety
 * `density` must be a live handle; the out pointers valid for writes.
 */
enum BcStatus bc_density_piece(const struct BcDensity *density,
                               size_t index,
                               double *left,
                               double *right,
                               double *value);

/**
 * `∫ f_n`, evaluated in the backend and then rounded.
 *
 * # Safety
 * `density` must be null or a live handle.
 */
double bc_density_integral(const struct BcDensity *density);

/**
 * Shannon entropy (nats) of the uniform measure on the `2^n` sums, with the
 * number of distinct atoms.
 *
 * # Safety
 * `beta` must be a live handle; `entropy` and `atoms` valid for writes.
 */
enum BcStatus bc_garsia_entropy(const struct BcBeta *beta,
                                uint32_t n,
                                double *entropy,
                                uint64_t *atoms);

/**
 * Monte-Carlo frequency of the switch region, seeded and reproducible.
 *
 * # Safety
 * `beta` must be a live handle; `estimate` and `std_error` valid for writes.
 */
enum BcStatus bc_estimate_mu_s(const struct BcBeta *beta,
                               uint64_t orbits,
                               uint64_t steps,
                               uint64_t burn_in,
                               uint64_t seed,
                               double *estimate,
                               double *std_error);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BETACOUNT_H */
