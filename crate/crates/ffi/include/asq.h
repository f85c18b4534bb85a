#ifndef ASQ_H
#define ASQ_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum AsqStatus {
  ASQ_STATUS_OK = 0,
  ASQ_STATUS_NULL_POINTER = 1,
  ASQ_STATUS_INVALID_ARGUMENT = 2,
  ASQ_STATUS_DOMAIN = 3,
  ASQ_STATUS_OUT_OF_RANGE = 4,
  ASQ_STATUS_SINGULAR = 5,
  ASQ_STATUS_CONVERGENCE = 6,
  ASQ_STATUS_NOT_UNIQUE = 7,
  ASQ_STATUS_DEGENERATE_FIT = 8,
  ASQ_STATUS_EXTRACTION_FAILED = 9,
  ASQ_STATUS_PANIC = 10,
} AsqStatus;

typedef enum AsqMethod {
  ASQ_METHOD_ANALYTIC = 0,
  ASQ_METHOD_NUMERIC = 1,
  ASQ_METHOD_CURRENT_PRODUCT = 2,
} AsqMethod;

typedef enum AsqConvention {
  // `E_dd + E_uu - E_du - E_ud = hJ`.
  ASQ_CONVENTION_EIGENENERGY = 0,
  // `H = -(hJ/2) sz sz`.
  ASQ_CONVENTION_INTERACTION = 1,
} AsqConvention;

// Opaque device handle.
typedef struct AsqDevice AsqDevice;

// Opaque fit-result handle.
typedef struct AsqFit AsqFit;

// Device energies in GHz; skewness is dimensionless.
typedef struct AsqDeviceParams {
  double ej_i_1;
  double ej_i_2;
  double ej_s_1;
  double ej_s_2;
  double ej_c;
  double e_c;
  double skew_1;
  double skew_2;
} AsqDeviceParams;

// Drive amplitudes, detunings and coupling in MHz.
typedef struct AsqDrive {
  double omega_p1;
  double omega_p2;
  double delta_1;
  double delta_2;
  double j;
} AsqDrive;

// Lifetimes in microseconds; `INFINITY` disables a channel.
typedef struct AsqRates {
  double t1_1;
  double t1_2;
  double t2_1;
  double t2_2;
} AsqRates;

typedef struct AsqPeakDecision {
  bool is_double;
  double j_mhz;
  double j_sigma;
  double chi_ratio;
  double f_a;
  double sigma;
  double f_b;
} AsqPeakDecision;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *asq_version(void);

// Message of the last failed call on this thread, or NULL. The pointer is
// valid until the next failing call on the same thread.
const char *asq_last_error(void);

// Creates a device handle from validated parameters.
//
// # Safety
// `params` must point to a readable [`AsqDeviceParams`]; `out` must be
// writable. The handle is released with [`asq_device_free`].
enum AsqStatus asq_device_new(const struct AsqDeviceParams *params, struct AsqDevice **out);

// # Safety
// `dev` is NULL or a handle from [`asq_device_new`] not yet freed.
void asq_device_free(struct AsqDevice *dev);

// Coupling strength in MHz at the given loop fluxes (flux quanta).
// `out_convention` may be NULL; otherwise it receives the sign
// convention of the returned value.
//
// # Safety
// `dev` is a live handle; `out_j` is writable; `out_convention` is NULL or writable.
enum AsqStatus asq_coupling(const struct AsqDevice *dev,
                            enum AsqMethod method,
                            double flux_1,
                            double flux_2,
                            double *out_j,
                            enum AsqConvention *out_convention);

// Spin-independent inductance in nH; `INFINITY` where it diverges.
//
// # Safety
// `dev` is a live handle; `out` is writable.
enum AsqStatus asq_l_asq(const struct AsqDevice *dev, double flux_1, double flux_2, double *out);

// Transmon 0-1 frequencies (GHz) of the four spin branches in the order
// dd, du, ud, uu.
//
// # Safety
// `dev` is a live handle; `out` points to 4 writable doubles.
enum AsqStatus asq_transmon_f01(const struct AsqDevice *dev,
                                double flux_1,
                                double flux_2,
                                size_t n_max,
                                double *out);

// Coupling-junction energy (GHz) giving the transmon frequency `ft` (GHz)
// with the device's ASQ energies; the device's own `ej_c` is ignored.
//
// # Safety
// `dev` is a live handle; `out` is writable.
enum AsqStatus asq_ejc_from_ft(const struct AsqDevice *dev, double ft, size_t n_max, double *out);

// Steady-state populations in the order dd, du, ud, uu.
//
// # Safety
// `drive` and `rates` are readable; `out` points to 4 writable doubles.
enum AsqStatus asq_steady_state(const struct AsqDrive *drive,
                                const struct AsqRates *rates,
                                double *out);

// Complex resonator fit; parameters `f_r0` (GHz), `Q_c`, `Q_i`, `alpha`.
//
// # Safety
// `f`, `re`, `im` point to `n` readable doubles; `out` is writable.
enum AsqStatus asq_fit_resonator(const double *f,
                                 const double *re,
                                 const double *im,
                                 size_t n,
                                 struct AsqFit **out);

// Sinusoidal (or skewed) flux-dispersion fit.
//
// # Safety
// `control` and `freq` point to `n` readable doubles; `out` is writable.
enum AsqStatus asq_fit_cpr(const double *control,
                           const double *freq,
                           size_t n,
                           bool skewed,
                           struct AsqFit **out);

// Exponential relaxation fit; parameters `a`, `T1`, `c`.
//
// # Safety
// `t` and `y` point to `n` readable doubles; `out` is writable.
enum AsqStatus asq_fit_t1(const double *t, const double *y, size_t n, struct AsqFit **out);

// # Safety
// `fit` is a live handle.
size_t asq_fit_param_count(const struct AsqFit *fit);

// Name, value and one-sigma error of parameter `index`. Any output pointer
// may be NULL. The name stays valid until the handle is freed.
//
// # Safety
// `fit` is a live handle; non-NULL outputs are writable.
enum AsqStatus asq_fit_param(const struct AsqFit *fit,
                             size_t index,
                             const char **name,
                             double *value,
                             double *sigma);

// Looks a parameter up by name.
//
// # Safety
// `fit` is a live handle; `name` is a NUL-terminated string; `value` is writable.
enum AsqStatus asq_fit_get(const struct AsqFit *fit, const char *name, double *value);

// Residual sum of squares and convergence flag; either output may be NULL.
//
// # Safety
// `fit` is a live handle; non-NULL outputs are writable.
enum AsqStatus asq_fit_summary(const struct AsqFit *fit, double *rss, bool *converged);

// # Safety
// `fit` is NULL or a live handle not yet freed.
void asq_fit_free(struct AsqFit *fit);

// Single/double peak decision on an undriven and a driven trace sharing
// the frequency axis `x` (GHz).
//
// # Safety
// `x`, `undriven`, `driven` point to `n` readable doubles; `out` is writable.
enum AsqStatus asq_extract_j(const double *x,
                             const double *undriven,
                             const double *driven,
                             size_t n,
                             struct AsqPeakDecision *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ASQ_H */
