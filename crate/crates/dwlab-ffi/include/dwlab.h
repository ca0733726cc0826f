#ifndef DWLAB_H
#define DWLAB_H

/* Generated by cbindgen; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes shared by every entry point.
 */
typedef enum DwStatus {
  DW_OK = 0,
  /**
   * Bad argument or hypothesis violation.
   */
  DW_INVALID = 1,
  /**
   * Parameter set fails the admissibility system.
   */
  DW_INADMISSIBLE = 2,
  /**
   * Runtime failure: instability, non-convergence, i/o.
   */
  DW_RUNTIME = 3,
  /**
   * A required pointer was null.
   */
  DW_NULL_POINTER = 4,
  /**
   * Internal panic intercepted at the boundary.
   */
  DW_PANIC = 5,
} DwStatus;

/**
 * Opaque periodic grid handle.
 */
typedef struct DwGrid DwGrid;

/**
 * Opaque trajectory handle.
 */
typedef struct DwTrajectory DwTrajectory;

/**
 * Flat mirror of the derived parameter set.
 */
typedef struct DwParams {
  uint32_t n;
  double p;
  double alpha;
  double beta_alpha;
  double delta_alpha;
  double s;
  double kappa;
  double gamma;
  double m;
  double d;
  /**
   * Predicted L^alpha decay exponent of u_t.
   */
  double l_alpha_decay;
  /**
   * Predicted homogeneous Sobolev decay exponent of u_t.
   */
  double hs_decay;
} DwParams;

/**
 * Kernel symbol values at one (t, |xi|^2) point.
 */
typedef struct DwKernelValues {
  double k;
  double k_dt;
  double k_dtt;
} DwKernelValues;

/**
 * One trajectory sample, norms of u_t unless stated.
 */
typedef struct DwSample {
  double t;
  double l_alpha;
  double l2_v;
  double hs_dot_v;
  double l2_u;
  double linf_v;
} DwSample;

/**
 * Decay-fit result.
 */
typedef struct DwDecayFit {
  double slope;
  double theoretical;
  double deviation;
  double r_squared;
  uintptr_t points;
} DwDecayFit;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copy the last error message on this thread into `buf` (NUL terminated,
 * truncated to `cap`). Returns the full message length in bytes.
 *
 * # Safety
 * `buf` must point to at least `cap` writable bytes, or be null (query mode).
 */
uintptr_t dw_last_error(char *buf, uintptr_t cap);

/**
 * Derive and validate the parameter set for dimension `n` and exponent `p`.
 * `s_override` may be NaN to accept the default Sobolev order.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum DwStatus dw_params_derive(uint32_t n, double p, double s_override, struct DwParams *out);

/**
 * Evaluate the kernel symbol and its first two time derivatives.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum DwStatus dw_kernel_eval(double t, double xi_sq, struct DwKernelValues *out);

/**
 * Create a periodic grid: `dim` in {1, 2}, `points` a power of two per axis.
 *
 * # Safety
 * `out` must be a valid pointer; the handle must be released with
 * `dw_grid_free`.
 */
enum DwStatus dw_grid_new(uintptr_t dim, uintptr_t points, double half_length, struct DwGrid **out);

/**
 * Release a grid handle. Null is a no-op.
 *
 * # Safety
 * `grid` must come from `dw_grid_new` and not be used afterwards.
 */
void dw_grid_free(struct DwGrid *grid);

/**
 * Run the nonlinear solver on gaussian/bump/single-mode data and return a
 * sampled trajectory handle.
 *
 * # Safety
 * `grid` must be a live handle, `ic_kind` a NUL-terminated string, `out` a
 * valid pointer; the result must be released with `dw_trajectory_free`.
 */
enum DwStatus dw_solve(const struct DwGrid *grid,
                       double p,
                       double eps,
                       const char *ic_kind,
                       double ic_shape,
                       double t_end,
                       double dt,
                       uintptr_t samples_per_decade,
                       struct DwTrajectory **out);

/**
 * Number of samples in a trajectory; 0 for a null handle.
 *
 * # Safety
 * `traj` must be a live handle or null.
 */
uintptr_t dw_trajectory_len(const struct DwTrajectory *traj);

/**
 * Fetch sample `index`.
 *
 * # Safety
 * `traj` must be a live handle and `out` a valid pointer.
 */
enum DwStatus dw_trajectory_sample(const struct DwTrajectory *traj,
                                   uintptr_t index,
                                   struct DwSample *out);

/**
 * Release a trajectory handle. Null is a no-op.
 *
 * # Safety
 * `traj` must come from `dw_solve` and not be used afterwards.
 */
void dw_trajectory_free(struct DwTrajectory *traj);

/**
 * Least-squares decay fit of log(value) against log(1+t) over
 * `[t_lo, t_hi]`.
 *
 * # Safety
 * `ts` and `values` must point to `len` readable doubles; `out` must be a
 * valid pointer.
 */
enum DwStatus dw_fit_decay(const double *ts,
                           const double *values,
                           uintptr_t len,
                           double t_lo,
                           double t_hi,
                           double theoretical,
                           struct DwDecayFit *out);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* DWLAB_H */
