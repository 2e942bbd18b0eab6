/* C interface to the onduloid library. Generated by cbindgen; do not edit. */

#ifndef ONDULOID_H
#define ONDULOID_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Outcome of a C API call. Matches the CLI exit-code convention where the
 * two overlap (2 input error, 3 non-convergence, 4 continuation failure).
 */
typedef enum OnduloidStatus {
  ONDULOID_STATUS_OK = 0,
  ONDULOID_STATUS_INVALID_INPUT = 2,
  ONDULOID_STATUS_NON_CONVERGENCE = 3,
  ONDULOID_STATUS_CONTINUATION_FAILURE = 4,
  ONDULOID_STATUS_INTERNAL = 5,
} OnduloidStatus;

/**
 * Opaque handle: a positive, even, 2π-periodic radius profile.
 */
typedef struct OnduloidProfile OnduloidProfile;

/**
 * Opaque handle: a traced branch of constant-curvature profiles.
 */
typedef struct OnduloidTrace OnduloidTrace;

/**
 * Branch continuation options; obtain defaults from
 * `onduloid_trace_options_default()` and adjust selectively.
 */
typedef struct OnduloidTraceOptions {
  /**
   * Highest retained cosine mode (K ≥ 8).
   */
  uint32_t modes;
  /**
   * Collocation intervals on [0, π] (M ≥ 4K).
   */
  uint32_t collocation;
  double a_step;
  double a_max;
  double newton_tol;
  uint32_t newton_max_iters;
  double fd_step;
  /**
   * Worker threads; any value yields bit-identical results.
   */
  uint32_t threads;
} OnduloidTraceOptions;

/**
 * One branch point, by value. `newton_iters` is 0 at the trivial point.
 */
typedef struct OnduloidBranchPoint {
  double a;
  double mu;
  double lambda;
  double residual_sup;
  uint32_t newton_iters;
} OnduloidBranchPoint;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copy the most recent error message on this thread into `buf` (truncated,
 * always NUL-terminated when `cap > 0`). Returns the full message length.
 *
 * # Safety
 * `buf` must be null or point to at least `cap` writable bytes.
 */
size_t onduloid_last_error(char *buf, size_t cap);

/**
 * The zero-mode constant b_α for dimension `n` and order `alpha`.
 *
 * # Safety
 * `out` must be a valid pointer to a double.
 */
enum OnduloidStatus onduloid_b_alpha(uint32_t n, double alpha, double *out);

/**
 * The symbol h(b) of the linearized operator.
 *
 * # Safety
 * `out` must be a valid pointer to a double.
 */
enum OnduloidStatus onduloid_symbol(double b, uint32_t n, double alpha, double *out);

/**
 * Eigenvalue λ_k(μ) = h(kμ) − b_α of the linearization at radius μ.
 *
 * # Safety
 * `out` must be a valid pointer to a double.
 */
enum OnduloidStatus onduloid_eigenvalue(uint32_t k,
                                        double mu,
                                        uint32_t n,
                                        double alpha,
                                        double *out);

/**
 * The bifurcation radius μ*: the unique root of h(μ) = b_α.
 *
 * # Safety
 * `out` must be a valid pointer to a double.
 */
enum OnduloidStatus onduloid_mu_star(uint32_t n, double alpha, double *out);

/**
 * Curvature of the straight cylinder of radius `kappa` (closed form).
 *
 * # Safety
 * `out` must be a valid pointer to a double.
 */
enum OnduloidStatus onduloid_constant_nmc(double kappa, uint32_t n, double alpha, double *out);

/**
 * Create a profile u(s) = Σ coeffs[k]·cos(ks) from `len` coefficients.
 * The caller owns the handle and must release it with
 * `onduloid_profile_free()`.
 *
 * # Safety
 * `coeffs` must point to `len` readable doubles; `out` must be a valid
 * pointer to a handle slot.
 */
enum OnduloidStatus onduloid_profile_new(const double *coeffs,
                                         size_t len,
                                         struct OnduloidProfile **out);

/**
 * Release a profile handle. A null pointer is a no-op.
 *
 * # Safety
 * `p` must be null or a handle from `onduloid_profile_new()` that has not
 * been freed.
 */
void onduloid_profile_free(struct OnduloidProfile *p);

/**
 * Pointwise nonlocal mean curvature H(u)(s) of a profile.
 *
 * # Safety
 * `p` must be a live profile handle; `out` must be a valid pointer to a
 * double.
 */
enum OnduloidStatus onduloid_profile_nmc(const struct OnduloidProfile *p,
                                         double s,
                                         uint32_t n,
                                         double alpha,
                                         double *out);

/**
 * Fill `opts` with the library defaults.
 *
 * # Safety
 * `opts` must be a valid pointer to an options struct.
 */
enum OnduloidStatus onduloid_trace_options_default(struct OnduloidTraceOptions *opts);

/**
 * Trace the bifurcating branch for (n, alpha). `opts` may be null for
 * defaults. On success the caller owns the trace handle and must release
 * it with `onduloid_trace_free()`.
 *
 * # Safety
 * `opts` must be null or a valid options pointer; `out` must be a valid
 * pointer to a handle slot.
 */
enum OnduloidStatus onduloid_trace_new(uint32_t n,
                                       double alpha,
                                       const struct OnduloidTraceOptions *opts,
                                       struct OnduloidTrace **out);

/**
 * Release a trace handle. A null pointer is a no-op.
 *
 * # Safety
 * `t` must be null or a handle from `onduloid_trace_new()` that has not
 * been freed.
 */
void onduloid_trace_free(struct OnduloidTrace *t);

/**
 * Number of points on the traced branch (0 for a null handle).
 *
 * # Safety
 * `t` must be null or a live trace handle.
 */
size_t onduloid_trace_len(const struct OnduloidTrace *t);

/**
 * The bifurcation radius the trace started from.
 *
 * # Safety
 * `t` must be a live trace handle; `out` must be a valid pointer to a
 * double.
 */
enum OnduloidStatus onduloid_trace_mu_star(const struct OnduloidTrace *t, double *out);

/**
 * Scalar data of branch point `i` (points are ordered by amplitude).
 *
 * # Safety
 * `t` must be a live trace handle; `out` must be a valid pointer to a
 * branch-point struct.
 */
enum OnduloidStatus onduloid_trace_point(const struct OnduloidTrace *t,
                                         size_t i,
                                         struct OnduloidBranchPoint *out);

/**
 * Number of cosine coefficients in the collocation profile of point `i`.
 *
 * # Safety
 * `t` must be a live trace handle; `out` must be a valid pointer to a
 * size slot.
 */
enum OnduloidStatus onduloid_trace_profile_len(const struct OnduloidTrace *t,
                                               size_t i,
                                               size_t *out);

/**
 * Copy the collocation-profile coefficients of point `i` into `buf`
 * (capacity `cap`); writes the coefficient count to `written`. The profile
 * is the 2π-periodic w = μ + a(cos + v) the solver converged on; feed it to
 * `onduloid_profile_new()` / `onduloid_profile_nmc()` to re-evaluate its
 * (constant) curvature.
 *
 * # Safety
 * `t` must be a live trace handle; `buf` must point to `cap` writable
 * doubles; `written` must be a valid pointer to a size slot.
 */
enum OnduloidStatus onduloid_trace_profile(const struct OnduloidTrace *t,
                                           size_t i,
                                           double *buf,
                                           size_t cap,
                                           size_t *written);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ONDULOID_H */
