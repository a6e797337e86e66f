#ifndef OSC_MASTER_H
#define OSC_MASTER_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum OscMethod {
  OSC_METHOD_MATSUBARA = 0,
  OSC_METHOD_TIME_DOMAIN = 1,
  OSC_METHOD_FREQUENCY_DOMAIN = 2,
} OscMethod;

/**
 * Status codes; the non-zero values match the CLI exit codes where both exist.
 */
typedef enum OscStatus {
  OSC_STATUS_OK = 0,
  OSC_STATUS_MISMATCH = 1,
  OSC_STATUS_INVALID_ARGUMENT = 2,
  OSC_STATUS_ORACLE = 3,
  OSC_STATUS_INTEGRATOR = 5,
  OSC_STATUS_NO_STEADY_STATE = 6,
  OSC_STATUS_NULL_POINTER = 7,
  OSC_STATUS_PANIC = 8,
} OscStatus;

/**
 * Opaque (ω̃0, Ω̃, βΩ) triple.
 */
typedef struct OscParams OscParams;

/**
 * Opaque sampled moment trajectory.
 */
typedef struct OscTrajectory OscTrajectory;

typedef struct OscOrderCoeffs {
  double a1;
  double a2;
  double a3;
  double a4;
} OscOrderCoeffs;

/**
 * Totals drive the dynamics; `orders[k]` holds order k + 2.
 */
typedef struct OscCoefficients {
  double delta;
  double lambda;
  double d_xx;
  double d_xp;
  struct OscOrderCoeffs orders[3];
} OscCoefficients;

typedef struct OscGaussianState {
  double mean_x;
  double mean_p;
  double var_xx;
  double var_pp;
  double cov_xp;
} OscGaussianState;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the calling thread's last error message into `buf` (NUL-terminated,
 * truncated to `cap`). Returns the full message length without the NUL.
 *
 * # Safety
 * `buf` must be null or point to at least `cap` writable bytes.
 */
size_t osc_last_error(char *buf, size_t cap);

/**
 * Library version as a static NUL-terminated string.
 */
const char *osc_version(void);

/**
 * Validates and stores a parameter set. `beta_omega` may be +inf.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum OscStatus osc_params_new(double omega0_tilde,
                              double omega_tau_e,
                              double beta_omega,
                              struct OscParams **out);

/**
 * # Safety
 * `p` must be null or a handle from [`osc_params_new`] not yet freed.
 */
void osc_params_free(struct OscParams *p);

/**
 * Closed-form coefficients summed through `max_order` (2..=4). Orders above
 * `max_order` are reported as zero.
 *
 * # Safety
 * `p` must be a live handle and `out` valid for one write.
 */
enum OscStatus osc_coefficients(const struct OscParams *p,
                                uint8_t max_order,
                                struct OscCoefficients *out);

/**
 * Compares every closed-form integral of `order` with its quadrature oracle.
 * Writes the largest relative deviation and returns `Mismatch` if it exceeds `tol`.
 *
 * # Safety
 * `p` must be a live handle and `max_rel` valid for one write.
 */
enum OscStatus osc_verify(const struct OscParams *p,
                          uint8_t order,
                          enum OscMethod method,
                          double tol,
                          double *max_rel);

/**
 * Integrates the moment equations (ħ = m = ω0 = 1) on `samples` uniform
 * times over [0, t_final].
 *
 * # Safety
 * `c` and `s0` must be valid for reads and `out` valid for one write.
 */
enum OscStatus osc_evolve(const struct OscCoefficients *c,
                          const struct OscGaussianState *s0,
                          double t_final,
                          size_t samples,
                          double rtol,
                          double atol,
                          struct OscTrajectory **out);

/**
 * # Safety
 * `t` must be a live trajectory handle.
 */
size_t osc_trajectory_len(const struct OscTrajectory *t);

/**
 * # Safety
 * `t` must be a live handle; `time` and `state` valid for one write each.
 */
enum OscStatus osc_trajectory_sample(const struct OscTrajectory *t,
                                     size_t index,
                                     double *time,
                                     struct OscGaussianState *state);

/**
 * Largest relative deviation of ⟨H⟩ from its initial value.
 *
 * # Safety
 * `t` must be a live handle and `out` valid for one write.
 */
enum OscStatus osc_trajectory_energy_drift(const struct OscTrajectory *t, double *out);

/**
 * # Safety
 * `t` must be null or a handle from [`osc_evolve`] not yet freed.
 */
void osc_trajectory_free(struct OscTrajectory *t);

/**
 * Fixed point of the moment equations, if the drift is stable.
 *
 * # Safety
 * `c` must be valid for reads and `out` valid for one write.
 */
enum OscStatus osc_steady_state(const struct OscCoefficients *c, struct OscGaussianState *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* OSC_MASTER_H */
