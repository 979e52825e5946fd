/* C interface to the kil kernel-approximation library. */

#ifndef KIL_H
#define KIL_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Convergence regime of a fitted refinement study.
typedef enum KilRegime {
  // Rate at or below the kernel smoothness.
  KIL_REGIME_ESCAPING = 0,
  // Rate between the kernel smoothness and its doubling.
  KIL_REGIME_SUPERCONVERGENCE = 1,
  // Rate above the doubled smoothness.
  KIL_REGIME_SATURATED = 2,
  // Errors at rounding level on every grid; no rate was fitted.
  KIL_REGIME_EXACT = 3,
} KilRegime;

// Result of a fallible call.
typedef enum KilStatus {
  // The call succeeded and any out-parameters were written.
  KIL_STATUS_OK = 0,
  // A descriptor, dimension, or parameter was rejected during validation.
  KIL_STATUS_INVALID_ARGUMENT = 1,
  // The computation itself failed (ill-conditioning, non-finite values).
  KIL_STATUS_NUMERICAL_FAILURE = 2,
  // A required pointer argument was null.
  KIL_STATUS_NULL_POINTER = 3,
  // An internal panic was caught at the boundary; state may be stale.
  KIL_STATUS_PANIC = 4,
} KilStatus;

// Opaque handle to a fitted kernel expansion.
typedef struct KilInterpolant KilInterpolant;

// Opaque handle to a positive definite kernel on a fixed dimension.
typedef struct KilKernel KilKernel;

// Opaque handle to a bounded evaluation region.
typedef struct KilRegion KilRegion;

// Opaque handle to a discretized kernel eigensystem on a region.
typedef struct KilSpectralModel KilSpectralModel;

// Fitted summary of a refinement study; `beta`, `standard_error`, and
// `theta_hat` are NaN when `regime` is [`KilRegime::Exact`].
typedef struct KilRateSummary {
  // Fitted log-log convergence rate.
  double beta;
  // Standard error of the fitted rate.
  //
  // Named to avoid the `stderr` macro from `<stdio.h>`.
  double standard_error;
  // Smoothness scale implied by the rate, capped at 2.
  double theta_hat;
  // Regime classification of the rate.
  enum KilRegime regime;
} KilRateSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Last error message on this thread, or null if no call has failed yet.
//
// The pointer stays valid until the next failing call on the same thread;
// do not free it.
const char *kil_last_error_message(void);

// Library version as a static nul-terminated string; do not free it.
const char *kil_version(void);

// Release a string returned through a `char **` out-parameter.
//
// # Safety
// `text` must be a pointer previously returned by this library's string
// out-parameters (or null, which is ignored), passed at most once.
void kil_string_free(char *text);

// Parse a kernel descriptor such as `"wendland-hat:1"` or `"matern-half"`
// for points of dimension `dim`.
//
// # Safety
// `descriptor` must be nul-terminated; `out` must be valid for one write.
enum KilStatus kil_kernel_parse(const char *descriptor, size_t dim, struct KilKernel **out);

// Release a kernel handle (null is ignored).
//
// # Safety
// `kernel` must come from [`kil_kernel_parse`] and be freed at most once.
void kil_kernel_free(struct KilKernel *kernel);

// Smoothness exponent of the kernel's native space, or NaN on null input.
//
// # Safety
// `kernel` must be a live handle or null.
double kil_kernel_tau(const struct KilKernel *kernel);

// Canonical descriptor of the kernel, released with [`kil_string_free`].
//
// # Safety
// `kernel` must be a live handle; `out` must be valid for one write.
enum KilStatus kil_kernel_descriptor(const struct KilKernel *kernel, char **out);

// Evaluate `k(x, y)` for two points of the kernel's dimension.
//
// # Safety
// `x` and `y` must each point to `dim` doubles matching the kernel's
// dimension; `out` must be valid for one write.
enum KilStatus kil_kernel_eval(const struct KilKernel *kernel,
                               const double *x,
                               const double *y,
                               size_t dim,
                               double *out);

// Parse a region descriptor such as `"interval:0,1"` or `"disk:0,0,0.83"`.
//
// # Safety
// `descriptor` must be nul-terminated; `out` must be valid for one write.
enum KilStatus kil_region_parse(const char *descriptor, struct KilRegion **out);

// Release a region handle (null is ignored).
//
// # Safety
// `region` must come from [`kil_region_parse`] and be freed at most once.
void kil_region_free(struct KilRegion *region);

// Ambient dimension of the region, or 0 on null input.
//
// # Safety
// `region` must be a live handle or null.
size_t kil_region_dimension(const struct KilRegion *region);

// Number of points in the level-`n` dyadic grid of the region.
//
// # Safety
// `region` must be a live handle; `out` must be valid for one write.
enum KilStatus kil_grid_size(const struct KilRegion *region, uint32_t n, size_t *out);

// Fill `buffer` with the level-`n` grid in lexicographic order, flattened
// point by point. `buffer_len` is the buffer's capacity in doubles and must
// be at least `kil_grid_size(...) * dimension`.
//
// # Safety
// `region` must be a live handle; `buffer` must be valid for `buffer_len`
// writes.
enum KilStatus kil_grid_fill(const struct KilRegion *region,
                             uint32_t n,
                             double *buffer,
                             size_t buffer_len);

// Fit a kernel expansion through `num_points` centers of dimension `dim`
// (flattened point by point in `centers`) matching `values`, with ridge
// parameter `ridge` (`0` for plain interpolation).
//
// # Safety
// `kernel` must be a live handle; `centers` must hold `num_points * dim`
// doubles; `values` must hold `num_points` doubles; `out` must be valid
// for one write.
enum KilStatus kil_fit(const struct KilKernel *kernel,
                       const double *centers,
                       size_t num_points,
                       size_t dim,
                       const double *values,
                       double ridge,
                       struct KilInterpolant **out);

// Release an interpolant handle (null is ignored).
//
// # Safety
// `interpolant` must come from a fitting or parsing call and be freed at
// most once.
void kil_interpolant_free(struct KilInterpolant *interpolant);

// Evaluate the expansion at a point of dimension `dim`.
//
// # Safety
// `interpolant` must be a live handle; `x` must hold `dim` doubles; `out`
// must be valid for one write.
enum KilStatus kil_interpolant_value(const struct KilInterpolant *interpolant,
                                     const double *x,
                                     size_t dim,
                                     double *out);

// Squared native-space norm of the expansion.
//
// # Safety
// `interpolant` must be a live handle; `out` must be valid for one write.
enum KilStatus kil_interpolant_native_norm_sq(const struct KilInterpolant *interpolant,
                                              double *out);

// Serialize the expansion to JSON, released with [`kil_string_free`].
// The encoding round-trips bit for bit through [`kil_interpolant_from_json`].
//
// # Safety
// `interpolant` must be a live handle; `out` must be valid for one write.
enum KilStatus kil_interpolant_to_json(const struct KilInterpolant *interpolant, char **out);

// Reconstruct an expansion serialized by [`kil_interpolant_to_json`].
//
// # Safety
// `json` must be nul-terminated; `out` must be valid for one write.
enum KilStatus kil_interpolant_from_json(const char *json, struct KilInterpolant **out);

// Default relative eigenvalue cutoff used by [`kil_spectral_build`].
double kil_default_drop_tol(void);

// Build the quadrature eigensystem of the kernel on the region at the given
// quadrature level, dropping modes below `drop_tol` relative to the leading
// eigenvalue (pass [`kil_default_drop_tol`] unless experimenting).
//
// # Safety
// `kernel` and `region` must be live handles; `out` must be valid for one
// write.
enum KilStatus kil_spectral_build(const struct KilKernel *kernel,
                                  const struct KilRegion *region,
                                  uint32_t quad_level,
                                  double drop_tol,
                                  struct KilSpectralModel **out);

// Release a spectral-model handle (null is ignored).
//
// # Safety
// `model` must come from [`kil_spectral_build`] and be freed at most once.
void kil_spectral_free(struct KilSpectralModel *model);

// Number of retained eigenmodes, or 0 on null input.
//
// # Safety
// `model` must be a live handle or null.
size_t kil_spectral_num_modes(const struct KilSpectralModel *model);

// Copy the retained eigenvalues (descending) into `buffer`; `buffer_len`
// must be at least [`kil_spectral_num_modes`].
//
// # Safety
// `model` must be a live handle; `buffer` must be valid for `buffer_len`
// writes.
enum KilStatus kil_spectral_eigenvalues(const struct KilSpectralModel *model,
                                        double *buffer,
                                        size_t buffer_len);

// Ratio of the power-scale norm of the expansion against the inverse-power
// prediction `q^{-theta * tau} * |u|`, the quantity whose boundedness over
// refinement the `bernstein` experiment tabulates.
//
// # Safety
// `model` and `interpolant` must be live handles; `out` must be valid for
// one write.
enum KilStatus kil_spectral_bernstein_ratio(const struct KilSpectralModel *model,
                                            const struct KilInterpolant *interpolant,
                                            double theta,
                                            double separation,
                                            double *out);

// Run a grid-refinement study of the target over levels `n_min..=n_max`
// and fit its convergence rate. `target` uses the same descriptors as the
// command line (`"exp"`, `"abs-power:0.2,0.5"`, ...); quadrature for the
// error integrals runs at level `n_max + quad_offset`.
//
// # Safety
// `kernel` and `region` must be live handles; `target` must be
// nul-terminated; `out` must be valid for one write.
enum KilStatus kil_rate_study(const struct KilKernel *kernel,
                              const struct KilRegion *region,
                              const char *target,
                              uint32_t n_min,
                              uint32_t n_max,
                              double ridge,
                              uint32_t quad_offset,
                              struct KilRateSummary *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* KIL_H */
