#ifndef AFDM_H
#define AFDM_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum AfdmStatus {
  AFDM_STATUS_OK = 0,
  AFDM_STATUS_NULL_POINTER = 1,
  AFDM_STATUS_INVALID_ARGUMENT = 2,
  AFDM_STATUS_INVALID_ORDER = 3,
  AFDM_STATUS_INVALID_CONFIG = 4,
  AFDM_STATUS_INVALID_GRID = 5,
  AFDM_STATUS_DIMENSION_MISMATCH = 6,
  AFDM_STATUS_RESOURCE_LIMIT = 7,
  AFDM_STATUS_NUMERIC = 8,
  AFDM_STATUS_REGION_COVERS_GRID = 9,
  AFDM_STATUS_DEGENERATE_GRID = 10,
  AFDM_STATUS_DEGENERATE_DISTRIBUTION = 11,
  AFDM_STATUS_BUFFER_TOO_SMALL = 12,
  AFDM_STATUS_PANIC = 13,
} AfdmStatus;

/**
 * Opaque waveform configuration.
 */
typedef struct AfdmConfigHandle AfdmConfigHandle;

/**
 * Delay/Doppler lattice; see the Rust `GridSpec`.
 */
typedef struct AfdmGridSpec {
  double tau_min;
  double tau_max;
  double tau_step;
  double nu_min;
  double nu_max;
  double nu_step;
} AfdmGridSpec;

typedef struct AfdmComplex {
  double re;
  double im;
} AfdmComplex;

typedef struct AfdmMetrics {
  double pslr_db;
  double islr_db;
  double peak_sidelobe_tau;
  double peak_sidelobe_nu;
} AfdmMetrics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. Valid until the
 * next failing call on the same thread.
 */
const char *afdm_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *afdm_version(void);

/**
 * Creates a configuration with chirp rate `c1 = c1_num / c1_den`.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle pointer.
 */
enum AfdmStatus afdm_config_new(size_t n,
                                int64_t c1_num,
                                int64_t c1_den,
                                double c2,
                                uint32_t order,
                                struct AfdmConfigHandle **out);

/**
 * Releases a handle from [`afdm_config_new`]. Null is ignored.
 *
 * # Safety
 * `h` must be null or a handle not yet freed.
 */
void afdm_config_free(struct AfdmConfigHandle *h);

/**
 * Number of lattice points along τ and ν.
 *
 * # Safety
 * Pointers must be valid.
 */
enum AfdmStatus afdm_grid_shape(const struct AfdmGridSpec *spec, size_t *n_tau, size_t *n_nu);

/**
 * Draws `len` unit-power symbols of square `order`-QAM from `seed`.
 *
 * # Safety
 * `out` must hold `len` values.
 */
enum AfdmStatus afdm_draw_symbols(uint32_t order,
                                  uint64_t seed,
                                  struct AfdmComplex *out,
                                  size_t len);

/**
 * Direct evaluation of `A(τ, ν)` for the given symbols.
 *
 * # Safety
 * `x` must hold `len` values; `out` must be valid.
 */
enum AfdmStatus afdm_ambiguity_point(const struct AfdmConfigHandle *cfg,
                                     const struct AfdmComplex *x,
                                     size_t len,
                                     double tau,
                                     double nu,
                                     struct AfdmComplex *out);

/**
 * `A` on every lattice point of `spec` via the fast path.
 *
 * # Safety
 * `x` must hold `len` values; `out` must hold `out_len` values.
 */
enum AfdmStatus afdm_ambiguity_grid(const struct AfdmConfigHandle *cfg,
                                    const struct AfdmComplex *x,
                                    size_t len,
                                    const struct AfdmGridSpec *spec,
                                    struct AfdmComplex *out,
                                    size_t out_len);

/**
 * Analytic mean and variance of `A(τ, ν)` over random symbols.
 *
 * # Safety
 * Output pointers must be valid.
 */
enum AfdmStatus afdm_analytic_moments(const struct AfdmConfigHandle *cfg,
                                      double tau,
                                      double nu,
                                      struct AfdmComplex *mean,
                                      double *variance);

/**
 * Mean of a Rice variable with noncentrality `s` and per-component variance `sigma2`.
 *
 * # Safety
 * `out` must be valid.
 */
enum AfdmStatus afdm_rice_mean(double s, double sigma2, double *out);

/**
 * Checks that `2·c1·N·τ` is an integer ≥ N for τ = 1..=tau_max.
 * `first_failure` receives the smallest failing delay, or 0 on success.
 *
 * # Safety
 * Output pointers must be valid.
 */
enum AfdmStatus afdm_sensing_check(const struct AfdmConfigHandle *cfg,
                                   int64_t tau_max,
                                   bool *passed,
                                   int64_t *first_failure);

/**
 * PSLR and ISLR of a magnitude grid sampled on `spec`, with the mainlobe of `cfg`.
 *
 * # Safety
 * `values` must hold `len` values; `out` must be valid.
 */
enum AfdmStatus afdm_grid_metrics(const struct AfdmConfigHandle *cfg,
                                  const struct AfdmGridSpec *spec,
                                  const double *values,
                                  size_t len,
                                  struct AfdmMetrics *out);

/**
 * Monte-Carlo average of `|A|` and per-point sample variance of `A`.
 * `variance` may be null.
 *
 * # Safety
 * `mean_magnitude` (and `variance` if non-null) must hold `out_len` values.
 */
enum AfdmStatus afdm_run_trials(const struct AfdmConfigHandle *cfg,
                                const struct AfdmGridSpec *spec,
                                size_t trials,
                                uint64_t base_seed,
                                double *mean_magnitude,
                                double *variance,
                                size_t out_len);

/**
 * `|μ_A|`, `σ_A` and the Rice mean on every lattice point. Any output may be null.
 *
 * # Safety
 * Non-null outputs must hold `out_len` values.
 */
enum AfdmStatus afdm_analytic_grids(const struct AfdmConfigHandle *cfg,
                                    const struct AfdmGridSpec *spec,
                                    double *mean,
                                    double *std,
                                    double *rice,
                                    size_t out_len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* AFDM_H */
