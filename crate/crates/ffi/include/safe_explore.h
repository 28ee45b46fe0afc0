#ifndef SAFE_EXPLORE_H
#define SAFE_EXPLORE_H

/* Generated by cbindgen. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes shared by all fallible functions.
 */
typedef enum SeStatus {
  SE_STATUS_OK = 0,
  SE_STATUS_NULL_POINTER = 1,
  SE_STATUS_INVALID_ARGUMENT = 2,
  SE_STATUS_DIMENSION_MISMATCH = 3,
  SE_STATUS_OUT_OF_DOMAIN = 4,
  SE_STATUS_NUMERICAL = 5,
  SE_STATUS_EMPTY_SAFE_SET = 6,
  SE_STATUS_OUT_OF_RANGE = 7,
  SE_STATUS_PANIC = 8,
  SE_STATUS_INTERNAL = 9,
} SeStatus;

/**
 * Gaussian-process constraint model.
 */
typedef struct SeGp SeGp;

/**
 * Confidence parameter and safe seed.
 */
typedef struct SeSafety SeSafety;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or NULL. The pointer stays
 * valid until the next failing call on the same thread.
 */
const char *se_last_error(void);

/**
 * Creates an empty model on the box `[lower, upper]` with an isotropic RBF
 * kernel and homoskedastic noise.
 *
 * # Safety
 * `lower` and `upper` must point to `dim` doubles; `out` must be writable.
 */
enum SeStatus se_gp_new(size_t dim,
                        const double *lower,
                        const double *upper,
                        double lengthscale,
                        double outputscale,
                        double noise_variance,
                        struct SeGp **out);

/**
 * # Safety
 * `gp` must come from [`se_gp_new`] and not be used afterwards. NULL is a
 * no-op.
 */
void se_gp_free(struct SeGp *gp);

/**
 * Number of observations held by the model, 0 for NULL.
 *
 * # Safety
 * `gp` must be NULL or a live handle.
 */
size_t se_gp_len(const struct SeGp *gp);

/**
 * Adds the observation `y` at `x`. On failure the model is unchanged.
 *
 * # Safety
 * `gp` must be a live handle and `x` must point to `dim` doubles.
 */
enum SeStatus se_gp_condition(struct SeGp *gp, const double *x, size_t dim, double y);

/**
 * Posterior mean and variance at `x`.
 *
 * # Safety
 * `gp` must be a live handle, `x` must point to `dim` doubles and the
 * outputs must be writable.
 */
enum SeStatus se_gp_posterior(const struct SeGp *gp,
                              const double *x,
                              size_t dim,
                              double *mean,
                              double *variance);

/**
 * Safety model with a constant `beta` and threshold 0.
 *
 * # Safety
 * `seed` must point to `dim` doubles; `out` must be writable.
 */
enum SeStatus se_safety_new(const double *seed, size_t dim, double beta, struct SeSafety **out);

/**
 * # Safety
 * `safety` must come from [`se_safety_new`] and not be used afterwards.
 */
void se_safety_free(struct SeSafety *safety);

/**
 * Whether `x` is classified safe at iteration `n`.
 *
 * # Safety
 * Handles must be live, `x` must point to `dim` doubles, `out` writable.
 */
enum SeStatus se_is_safe(const struct SeGp *gp,
                         const struct SeSafety *safety,
                         size_t n,
                         const double *x,
                         size_t dim,
                         bool *out);

/**
 * Mutual information between an observation at `x` and the safety of `z`.
 *
 * # Safety
 * `gp` must be live, `x` and `z` must point to `dim` doubles, `out` writable.
 */
enum SeStatus se_mutual_info(const struct SeGp *gp,
                             const double *x,
                             const double *z,
                             size_t dim,
                             double *out);

/**
 * Next evaluation point with the default optimizer settings. `x_out` and
 * `z_out` receive `dim` doubles each; `value_out` may be NULL.
 *
 * # Safety
 * Handles must be live and the output buffers must hold `dim` doubles.
 */
enum SeStatus se_select_next(const struct SeGp *gp,
                             const struct SeSafety *safety,
                             size_t n,
                             uint64_t rng_seed,
                             double *x_out,
                             double *z_out,
                             size_t dim,
                             double *value_out);

/**
 * Exact binary entropy (nats) of the safety indicator for `mean / std`.
 */
double se_entropy_exact(double ratio);

/**
 * Gaussian-shaped approximation of [`se_entropy_exact`].
 */
double se_entropy_approx(double ratio);

/**
 * Information-gain lower bound as a function of the largest safe variance.
 */
double se_b(double eta, double mean_bound, double noise);

/**
 * Inverse of [`se_b`]; `target` must lie in `[0, ln 2)`.
 *
 * # Safety
 * `out` must be writable.
 */
enum SeStatus se_b_inverse(double target, double mean_bound, double noise, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SAFE_EXPLORE_H */
