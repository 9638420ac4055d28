#ifndef BLSTAB_H
#define BLSTAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Convention for the constant offset of the profile.
 */
typedef enum BlsConvention {
  BLS_CONVENTION_WALL_ANCHORED = 0,
  BLS_CONVENTION_CLAIM_LITERAL = 1,
} BlsConvention;

/**
 * Status code returned by every function.
 */
typedef enum BlsStatus {
  BLS_STATUS_OK = 0,
  BLS_STATUS_INVALID_ARGUMENT = 1,
  BLS_STATUS_NULL_POINTER = 2,
  BLS_STATUS_SINGULAR = 3,
  BLS_STATUS_NO_CONVERGENCE = 4,
  BLS_STATUS_POLE_PROXIMITY = 5,
  BLS_STATUS_UNDERRESOLVED = 6,
  /**
   * No eigenvalue with positive imaginary part above the threshold.
   */
  BLS_STATUS_NOT_FOUND = 7,
  BLS_STATUS_IO = 8,
  BLS_STATUS_INTERNAL = 9,
} BlsStatus;

/**
 * Sampled boundary-layer profile.
 */
typedef struct BlsProfile BlsProfile;

/**
 * Sorted Rayleigh spectrum.
 */
typedef struct BlsSpectrum BlsSpectrum;

typedef struct BlsComplex {
  double re;
  double im;
} BlsComplex;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the calling thread's last error message into `buf` (NUL
 * terminated, truncated to `cap`). Returns the full message length without
 * the terminator, or 0 when the last call succeeded.
 *
 * # Safety
 * `buf` must be null or valid for `cap` bytes.
 */
size_t bls_last_error(char *buf, size_t cap);

/**
 * Wall trace `φ(t)` for interior wavenumber `alpha`.
 *
 * # Safety
 * `out` must be null or valid for writing.
 */
enum BlsStatus bls_trace_phi(double t, double alpha, double *out);

/**
 * Point-vortex amplitudes `(a1, a2, a3)` that cancel the interior wall
 * shear at `t = 0`.
 *
 * # Safety
 * `out` must be null or valid for writing 3 doubles.
 */
enum BlsStatus bls_solve_dirac_coefficients(double alpha, double *out);

/**
 * Builds the profile at time `t` on `[0, y0]` with mesh `h`.
 * `convention` is a [`BlsConvention`] value.
 *
 * # Safety
 * `out` must be null or valid for writing; the handle it receives must be
 * released with [`bls_profile_free`].
 */
enum BlsStatus bls_profile_new(double t,
                               double alpha,
                               double y0,
                               double h,
                               uint32_t convention,
                               struct BlsProfile **out);

/**
 * Number of samples (`N + 1`, wall included).
 *
 * # Safety
 * `profile` must be null or a live handle.
 */
size_t bls_profile_len(const struct BlsProfile *profile);

/**
 * Far-field value `V(Y0)`.
 *
 * # Safety
 * `profile` must be null or a live handle; `out` null or writable.
 */
enum BlsStatus bls_profile_far_field(const struct BlsProfile *profile, double *out);

/**
 * Copies `Y`, `V` and `V''` into caller buffers of length `len`, which
 * must equal [`bls_profile_len`]. Any of the three may be null to skip it.
 *
 * # Safety
 * Non-null buffers must be valid for `len` doubles.
 */
enum BlsStatus bls_profile_copy(const struct BlsProfile *profile,
                                double *y,
                                double *v,
                                double *vpp,
                                size_t len);

/**
 * # Safety
 * `profile` must be null or a handle not yet freed.
 */
void bls_profile_free(struct BlsProfile *profile);

/**
 * Full Rayleigh spectrum of `profile` at wavenumber `alpha_ray`.
 * Eigenvalues with `|Im c| > threshold` count as discrete.
 *
 * # Safety
 * `profile` must be a live handle; `out` null or writable. The result is
 * released with [`bls_spectrum_free`].
 */
enum BlsStatus bls_spectrum_compute(const struct BlsProfile *profile,
                                    double alpha_ray,
                                    double threshold,
                                    struct BlsSpectrum **out);

/**
 * # Safety
 * `spectrum` must be null or a live handle.
 */
size_t bls_spectrum_len(const struct BlsSpectrum *spectrum);

/**
 * Copies the eigenvalues, sorted by real then imaginary part.
 *
 * # Safety
 * `buf` must be valid for `len` elements, `len == bls_spectrum_len`.
 */
enum BlsStatus bls_spectrum_copy(const struct BlsSpectrum *spectrum,
                                 struct BlsComplex *buf,
                                 size_t len);

/**
 * Eigenvalue with the largest imaginary part, or `NotFound` when the
 * spectrum has no discrete unstable member.
 *
 * # Safety
 * `spectrum` must be a live handle; `out` null or writable.
 */
enum BlsStatus bls_spectrum_most_unstable(const struct BlsSpectrum *spectrum,
                                          struct BlsComplex *out);

/**
 * # Safety
 * `spectrum` must be null or a handle not yet freed.
 */
void bls_spectrum_free(struct BlsSpectrum *spectrum);

/**
 * Refines `seed` to a Rayleigh eigenvalue by shooting from `Y0` with
 * `steps` RK4 steps. Writes `c` and `|ψ(0, c)|`.
 *
 * # Safety
 * `profile` must be a live handle; `c_out` and `residual_out` null or
 * writable (`residual_out` may be null to skip it).
 */
enum BlsStatus bls_newton_refine(const struct BlsProfile *profile,
                                 double alpha_ray,
                                 struct BlsComplex seed,
                                 size_t steps,
                                 struct BlsComplex *c_out,
                                 double *residual_out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BLSTAB_H */
