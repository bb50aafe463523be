#ifndef SELFDIST_H
#define SELFDIST_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define SD_THETA_EQ1 1

#define SD_THETA_EQ2 2

#define SD_THETA_EQ3 3

#define SD_THETA_EQ4 4

#define SD_RATIO_OPTIMAL 0

#define SD_RATIO_SIMPLIFIED 1

#define SD_SAMPLER_VERTEX 0

#define SD_SAMPLER_BALL 1

#define SD_SAMPLER_BOUNDARY 2

// Result code of every fallible call. Values 2 to 4 match the exit codes of
// the command-line tool.
typedef enum SdStatus {
  SD_STATUS_OK = 0,
  SD_STATUS_NULL_POINTER = 1,
  SD_STATUS_INVALID_INPUT = 2,
  SD_STATUS_DOMAIN = 3,
  SD_STATUS_CERTIFICATE_INVALID = 4,
  SD_STATUS_PANIC = 5,
} SdStatus;

// Opaque covering handle.
typedef struct SdCovering SdCovering;

// Opaque measure handle.
typedef struct SdMeasure SdMeasure;

// Opaque norm handle.
typedef struct SdNorm SdNorm;

// Value of a Monte Carlo or exact self-distance evaluation.
typedef struct SdDeltaEstimate {
  double value;
  // Standard error; named to avoid the `stderr` macro of `<stdio.h>`.
  double std_error;
  uint64_t samples;
} SdDeltaEstimate;

// Outcome of a covering verification.
typedef struct SdVerifyResult {
  bool verified;
  uint64_t points_checked;
} SdVerifyResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or NULL. The pointer stays
// valid until the next failing call on the same thread.
const char *sd_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *sd_version(void);

// Releases a string returned by this library.
//
// # Safety
// `s` must be NULL or a pointer returned by a `*_json` function of this
// library that has not been freed.
void sd_string_free(char *s);

// Parses a norm from its JSON form, e.g. `{"dim":2,"kind":{"lp":"inf"}}`.
//
// # Safety
// `json` must be a NUL-terminated string; `out` must be writable.
enum SdStatus sd_norm_from_json(const char *json, struct SdNorm **out);

// `ℓp` norm on `R^dim`; `p = INFINITY` gives the maximum norm.
//
// # Safety
// `out` must be writable.
enum SdStatus sd_norm_lp(size_t dim, double p, struct SdNorm **out);

// Polytopal norm `max_k |⟨a_k, x⟩|`; `functionals` holds `count` rows of
// length `dim`, row-major.
//
// # Safety
// `functionals` must point to `count * dim` doubles; `out` must be writable.
enum SdStatus sd_norm_polytopal(size_t dim,
                                const double *functionals,
                                size_t count,
                                struct SdNorm **out);

// # Safety
// `norm` must be NULL or a live handle from this library.
void sd_norm_free(struct SdNorm *norm);

// # Safety
// `norm` must be a live handle; `x` must point to `len` doubles.
enum SdStatus sd_norm_eval(const struct SdNorm *norm, const double *x, size_t len, double *out);

// Discrete measure with `count` atoms of dimension `dim` (row-major) and
// the given weights.
//
// # Safety
// `atoms` must point to `count * dim` doubles and `weights` to `count`.
enum SdStatus sd_measure_new(const double *atoms,
                             const double *weights,
                             size_t count,
                             size_t dim,
                             struct SdMeasure **out);

// Parses `{"atoms": [[...], ...], "weights": [...]}`.
//
// # Safety
// `json` must be a NUL-terminated string; `out` must be writable.
enum SdStatus sd_measure_from_json(const char *json, struct SdMeasure **out);

// Uniform measure on the `2^n` vertices of the cube.
//
// # Safety
// `out` must be writable.
enum SdStatus sd_measure_uniform_vertex(size_t n, struct SdMeasure **out);

// Number of atoms after merging duplicates; 0 for NULL.
//
// # Safety
// `measure` must be NULL or a live handle.
size_t sd_measure_len(const struct SdMeasure *measure);

// # Safety
// `measure` must be NULL or a live handle from this library.
void sd_measure_free(struct SdMeasure *measure);

// Exact self-distance of a discrete measure.
//
// # Safety
// Handles must be live; `out` must be writable.
enum SdStatus sd_delta_discrete(const struct SdNorm *norm,
                                const struct SdMeasure *measure,
                                double *out);

// Monte Carlo self-distance of a sampled measure (`SD_SAMPLER_*`).
//
// # Safety
// `norm` must be live; `out` must be writable.
enum SdStatus sd_delta_monte_carlo(const struct SdNorm *norm,
                                   uint32_t sampler,
                                   uint64_t seed,
                                   uint64_t pairs,
                                   struct SdDeltaEstimate *out);

// Covering-density bound `Θ_n` (`SD_THETA_*`), `n ≥ 3`.
//
// # Safety
// `out` must be writable.
enum SdStatus sd_theta_n(uint64_t n, uint32_t theta, double *out);

// # Safety
// `out` must be writable.
enum SdStatus sd_covering_bound_generic(uint64_t s, double r, double *out);

// # Safety
// `out` must be writable.
enum SdStatus sd_fixed_point_bound(uint64_t s, double r, double *out);

// # Safety
// `out` must be writable.
enum SdStatus sd_optimal_r(uint64_t n, double *out);

// Value of the `n ≥ 3` bound for a density variant and ratio choice.
//
// # Safety
// `out` must be writable.
enum SdStatus sd_bound_highdim(uint64_t n, uint32_t theta, uint32_t ratio_choice, double *out);

// Full JSON report of the `n ≥ 3` bound; free with [`sd_string_free`].
//
// # Safety
// `out` must be writable.
enum SdStatus sd_bound_highdim_json(uint64_t n, uint32_t theta, uint32_t ratio_choice, char **out);

// `f(n)` with `Δ ≤ 2(1 − 2^{−n} f(n))`, `n ≥ 2`.
//
// # Safety
// `out` must be writable.
enum SdStatus sd_f_of_n(uint64_t n, uint32_t theta, double *out);

// Parses `{"norm": {...}, "ratio": r, "centers": [[...], ...]}`.
//
// # Safety
// `json` must be a NUL-terminated string; `out` must be writable.
enum SdStatus sd_covering_from_json(const char *json, struct SdCovering **out);

// The maximum-norm ball cut into `2^n` half-size cubes.
//
// # Safety
// `out` must be writable.
enum SdStatus sd_cube_cover(size_t n, struct SdCovering **out);

// # Safety
// `cover` must be NULL or a live handle from this library.
void sd_covering_free(struct SdCovering *cover);

// Grid verification at the given spacing.
//
// # Safety
// `cover` must be live; `out` must be writable.
enum SdStatus sd_verify_cover_grid(const struct SdCovering *cover,
                                   double resolution,
                                   struct SdVerifyResult *out);

// Bound certified by `cover` for `measure`; fails with
// `CertificateInvalid` when an atom lies in no homothet.
//
// # Safety
// Handles must be live; `out` must be writable.
enum SdStatus sd_certified_bound(const struct SdCovering *cover,
                                 const struct SdMeasure *measure,
                                 double *out);

// Maximizes the self-distance over weights of `count` atoms (row-major,
// length `dim` each). Writes `count` weights and the optimal value.
//
// # Safety
// `atoms` must point to `count * norm.dim` doubles, `weights_out` to room
// for `count` doubles; `value_out` must be writable.
enum SdStatus sd_maximize_weights(const struct SdNorm *norm,
                                  const double *atoms,
                                  size_t count,
                                  uint64_t restarts,
                                  uint64_t max_iters,
                                  uint64_t seed,
                                  double *weights_out,
                                  double *value_out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SELFDIST_H */
