#ifndef EXPURGATED_H
#define EXPURGATED_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

// Which exponent curve to compute.
typedef enum ExpCurveKind {
  EXP_CURVE_KIND_GALLAGER = 0,
  EXP_CURVE_KIND_CKM_BHATTACHARYYA = 1,
  EXP_CURVE_KIND_CHERNOFF_NEW = 2,
} ExpCurveKind;

// Estimator for the fractional moment of the enumerator.
typedef enum ExpMomentMode {
  EXP_MOMENT_MODE_EXACT_BINOMIAL = 0,
  EXP_MOMENT_MODE_MONTE_CARLO = 1,
} ExpMomentMode;

// Result code of every fallible call.
typedef enum ExpStatus {
  EXP_STATUS_OK = 0,
  // A required pointer argument was null.
  EXP_STATUS_NULL_POINTER = 1,
  // The transition matrix is not a valid stochastic matrix.
  EXP_STATUS_INVALID_CHANNEL = 2,
  // The input distribution is invalid or does not fit the channel.
  EXP_STATUS_INVALID_DISTRIBUTION = 3,
  // A scalar argument is out of range.
  EXP_STATUS_INVALID_PARAMETER = 4,
  // An argument lies outside the domain of a closed-form function.
  EXP_STATUS_DOMAIN_ERROR = 5,
  // A numerical routine failed (NaN objective or unbounded optimum).
  EXP_STATUS_NUMERICAL_ERROR = 6,
  // An output buffer is shorter than required.
  EXP_STATUS_BUFFER_TOO_SMALL = 7,
  // An internal panic was caught.
  EXP_STATUS_PANIC = 8,
} ExpStatus;

// Opaque discrete memoryless channel.
typedef struct ExpChannel ExpChannel;

// Opaque channel plus input distribution, with cached distance matrices.
typedef struct ExpInputs ExpInputs;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null if the last call
// succeeded. The pointer stays valid until the next call on this thread.
const char *exp_last_error_message(void);

// Creates a channel from a row-major `nx` by `ny` transition matrix.
//
// # Safety
// `rows` must be valid for `nx * ny` reads and `out` for one write.
enum ExpStatus exp_channel_new(const double *rows, size_t nx, size_t ny, struct ExpChannel **out);

// Releases a channel. Null is ignored.
//
// # Safety
// `ch` must be null or a handle from [`exp_channel_new`] not yet freed.
void exp_channel_free(struct ExpChannel *ch);

// Pairs a channel with an input distribution `q` of length `len`. The
// channel is copied, so it may be freed afterwards.
//
// # Safety
// `ch` must be a live handle, `q` valid for `len` reads and `out` for one
// write.
enum ExpStatus exp_inputs_new(const struct ExpChannel *ch,
                              const double *q,
                              size_t len,
                              struct ExpInputs **out);

// Releases exponent inputs. Null is ignored.
//
// # Safety
// `inputs` must be null or a handle from [`exp_inputs_new`] not yet freed.
void exp_inputs_free(struct ExpInputs *inputs);

// Gallager's `E_0(rho, q)` in nats.
//
// # Safety
// `inputs` must be a live handle and `out` valid for one write.
enum ExpStatus exp_e0(const struct ExpInputs *inputs, double rho, double *out);

// Expurgated exponent `E_G(rho, s)` with Chernoff distance of order `s`.
// An infinite value is reported as `+inf`.
//
// # Safety
// `inputs` must be a live handle and `out` valid for one write.
enum ExpStatus exp_eg(const struct ExpInputs *inputs, double rho, double s, double *out);

// Improved expurgated exponent `E(rho, s)` in nats.
//
// # Safety
// `inputs` must be a live handle and `out` valid for one write.
enum ExpStatus exp_ckm_e(const struct ExpInputs *inputs, double rho, double s, double *out);

// `max_s E(rho, s)` and its maximizer.
//
// # Safety
// `inputs` must be a live handle; `value` and `s_star` valid for one write.
enum ExpStatus exp_ckm_e_best_s(const struct ExpInputs *inputs,
                                double rho,
                                double *value,
                                double *s_star);

// Fills `out` (row-major, `len >= nx * nx`) with the Chernoff distance
// matrix of order `s`. Infinite distances are `+inf`.
//
// # Safety
// `inputs` must be a live handle and `out` valid for `len` writes.
enum ExpStatus exp_distance_matrix(const struct ExpInputs *inputs,
                                   double s,
                                   double *out,
                                   size_t len);

// Evaluates one exponent curve on the sorted nonnegative `rates`.
//
// `values` receives the exponent at each rate. `rho_star` and `s_star` may
// be null; otherwise they receive the optimizing parameters. `r1` may be
// null; otherwise it receives the critical rate.
//
// `rho_max <= 0` selects the default cap on `rho`.
//
// # Safety
// `inputs` must be a live handle, `rates` and `values` valid for `n`
// elements, and each non-null optional output valid for `n` writes (one for
// `r1`).
enum ExpStatus exp_curve(const struct ExpInputs *inputs,
                         enum ExpCurveKind kind,
                         const double *rates,
                         size_t n,
                         double rho_max,
                         double *values,
                         double *rho_star,
                         double *s_star,
                         double *r1);

// Gaussian-channel distortion-rate function `D(R)`.
//
// # Safety
// `out` must be valid for one write.
enum ExpStatus exp_gaussian_d_of_r(double power, double sigma2, double rate, double *out);

// Gaussian-channel rate-distortion function `R(D)`.
//
// # Safety
// `out` must be valid for one write.
enum ExpStatus exp_gaussian_r_of_d(double power, double sigma2, double distortion, double *out);

// Gaussian-channel expurgated exponent on the sorted nonnegative `rates`,
// with the same output conventions as [`exp_curve`].
//
// # Safety
// `rates` and `values` must be valid for `n` elements, each non-null
// optional output for `n` writes (one for `r1`).
enum ExpStatus exp_gaussian_curve(double power,
                                  double sigma2,
                                  const double *rates,
                                  size_t n,
                                  double *values,
                                  double *rho_star,
                                  double *r1);

// Theoretical exponent of the fractional moment `E[N^{1/rho}]` of the
// enumerator with block length `n`, rate `rate` and type exponent
// `type_exponent`.
//
// # Safety
// `out` must be valid for one write.
enum ExpStatus exp_moment_theory(size_t n,
                                 double rate,
                                 double type_exponent,
                                 double rho,
                                 double *out);

// Empirical moment exponent `(1/n) ln E[N^{1/rho}]`. `trials` and `seed`
// apply to Monte Carlo mode only. `underflow` may be null.
//
// # Safety
// `out` must be valid for one write; `underflow` null or valid for one write.
enum ExpStatus exp_moment_empirical(size_t n,
                                    double rate,
                                    double type_exponent,
                                    double rho,
                                    enum ExpMomentMode mode,
                                    size_t trials,
                                    uint64_t seed,
                                    double *out,
                                    bool *underflow);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* EXPURGATED_H */
