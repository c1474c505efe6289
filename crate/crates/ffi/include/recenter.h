/* C interface to the recenter library: truncated coherent-state kernels, constraint regularization, and kernel recentering. */

#ifndef RECENTER_H
#define RECENTER_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes for every fallible entry point.
 */
typedef enum RecenterStatus {
  RECENTER_STATUS_OK = 0,
  /**
   * A precondition on the inputs was violated.
   */
  RECENTER_STATUS_INVALID_INPUT = 1,
  /**
   * An eigensolve or another numerical routine failed.
   */
  RECENTER_STATUS_NUMERICAL_FAILURE = 2,
  /**
   * The requested state leaks past the basis truncation.
   */
  RECENTER_STATUS_TRUNCATION_TOO_SMALL = 3,
  /**
   * A required pointer argument was null.
   */
  RECENTER_STATUS_NULL_POINTER = 4,
  /**
   * The library panicked; the state of outputs is unspecified.
   */
  RECENTER_STATUS_PANIC = 5,
} RecenterStatus;

/**
 * Opaque truncated oscillator representation.
 */
typedef struct RecenterOscillator RecenterOscillator;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copy the last error message on this thread into `buf` (NUL-terminated,
 * truncated to `cap` bytes). Returns the full message length including the
 * terminator, or 0 when no error has been recorded.
 *
 * # Safety
 * `buf` must point to at least `cap` writable bytes, or be null.
 */
uintptr_t recenter_last_error(char *buf, uintptr_t cap);

/**
 * Library version as a static NUL-terminated string.
 */
const char *recenter_version(void);

/**
 * Closed-form coherent overlap `<p2,q2|p1,q1>` for fiducial width `omega0`.
 *
 * # Safety
 * `out_re` and `out_im` must be valid writable pointers.
 */
enum RecenterStatus recenter_overlap_analytic(double p2,
                                              double q2,
                                              double p1,
                                              double q1,
                                              double omega0,
                                              double *out_re,
                                              double *out_im);

/**
 * Build a truncated representation with fiducial width `omega0` carrying
 * `H = (P^2 + omega^2 Q^2)/2 + quartic_g (a + a^dag)^4`.
 *
 * On success `*out` owns the handle; release it with
 * [`recenter_oscillator_free`].
 *
 * # Safety
 * `out` must be a valid writable pointer.
 */
enum RecenterStatus recenter_oscillator_new(uintptr_t dim,
                                            double omega0,
                                            double omega,
                                            double quartic_g,
                                            struct RecenterOscillator **out);

/**
 * Release a handle created by [`recenter_oscillator_new`]. Null is ignored.
 *
 * # Safety
 * `handle` must be null or a pointer obtained from
 * [`recenter_oscillator_new`] that has not been freed.
 */
void recenter_oscillator_free(struct RecenterOscillator *handle);

/**
 * Propagator matrix `<label_j| e^{-i dt H} |label_k>` over `n_labels`
 * phase-space labels (interleaved `p, q`). `out` receives `n_labels^2`
 * complex entries as interleaved `re, im`, row-major.
 *
 * # Safety
 * `labels` must hold `2 * n_labels` doubles and `out` must have room for
 * `2 * n_labels * n_labels` doubles; `handle` must be a live handle.
 */
enum RecenterStatus recenter_oscillator_propagator(const struct RecenterOscillator *handle,
                                                   double dt,
                                                   const double *labels,
                                                   uintptr_t n_labels,
                                                   double *out);

/**
 * Recenter the handle's Hamiltonian: write the unit-norm maximizer of the
 * damped overlap quotient into `coeffs` (`dim` doubles), its quotient into
 * `*quotient`, and its energy into `*energy`.
 *
 * # Safety
 * `coeffs` must have room for the handle's dimension; `quotient` and
 * `energy` must be valid writable pointers; `handle` must be live.
 */
enum RecenterStatus recenter_oscillator_recenter(const struct RecenterOscillator *handle,
                                                 double lambda,
                                                 double *coeffs,
                                                 double *quotient,
                                                 double *energy);

/**
 * Positive-semidefiniteness check of an `n x n` Hermitian matrix passed as
 * interleaved `re, im` doubles, row-major. Writes the smallest eigenvalue
 * and whether `min_eig >= -tol * max(1, ||G||)`.
 *
 * # Safety
 * `entries` must hold `2 * n * n` doubles; `min_eig` and `pass` must be
 * valid writable pointers.
 */
enum RecenterStatus recenter_psd_check(const double *entries,
                                       uintptr_t n,
                                       double tol,
                                       double *min_eig,
                                       bool *pass);

/**
 * Headline free-field number: recenter every mode of an `n`-site periodic
 * box (d = 1, length `l_box`) at fiducial width `m_width` and return the
 * worst deviation of the recentered kernel from the closed-form
 * relativistic kernel of mass `mass`, over `n_pairs` deterministic label
 * pairs at time separation `dt`.
 *
 * # Safety
 * `max_dev` must be a valid writable pointer.
 */
enum RecenterStatus recenter_free_field_recovery_dev(uintptr_t n,
                                                     double l_box,
                                                     double mass,
                                                     double m_width,
                                                     double lambda,
                                                     double dt,
                                                     uintptr_t d_base,
                                                     uintptr_t n_pairs,
                                                     double *max_dev);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RECENTER_H */
