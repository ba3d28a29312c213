#ifndef ACONTRACT_H
#define ACONTRACT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Extremal family of a shock.
typedef enum AcFamily {
  AC_FAMILY_FIRST = 0,
  AC_FAMILY_LAST = 1,
} AcFamily;

// Result of every fallible call.
typedef enum AcStatus {
  AC_STATUS_OK = 0,
  AC_STATUS_NULL_POINTER = 1,
  AC_STATUS_INVALID_ARGUMENT = 2,
  AC_STATUS_DOMAIN = 3,
  AC_STATUS_DEGENERACY = 4,
  AC_STATUS_NOT_FOUND = 5,
  AC_STATUS_CONTINUATION = 6,
  AC_STATUS_RANGE = 7,
  AC_STATUS_INTEGRATION = 8,
  AC_STATUS_INCONSISTENT_SHOCK = 9,
  AC_STATUS_PRECONDITION = 10,
  AC_STATUS_TRUNCATION = 11,
  AC_STATUS_BLOW_UP = 12,
  AC_STATUS_CONFIG = 13,
  AC_STATUS_PANIC = 99,
} AcStatus;

// A weighted shock `(u_L, u_R, σ)`.
typedef struct AcContext AcContext;

// A traced extremal shock curve.
typedef struct AcCurve AcCurve;

// A hyperbolic system with its entropy pair.
typedef struct AcSystem AcSystem;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copies the calling thread's last error message, NUL-terminated and
// truncated to `len` bytes. Returns the full message length without the NUL.
//
// # Safety
// `buf` must be null or point to `len` writable bytes.
size_t ac_last_error_message(char *buf, size_t len);

// Library version as a static NUL-terminated string.
const char *ac_version(void);

// Inviscid Burgers with `η = u²/2`.
//
// # Safety
// `out` must be a valid pointer.
enum AcStatus ac_system_new_burgers(struct AcSystem **out);

// Isentropic Euler in `(ρ, m)` with `p = ρ^γ`.
//
// # Safety
// `out` must be a valid pointer.
enum AcStatus ac_system_new_isentropic_euler(double gamma, struct AcSystem **out);

// Full Euler in `(ρ, m, E)` with the physical entropy.
//
// # Safety
// `out` must be a valid pointer.
enum AcStatus ac_system_new_full_euler(double gamma, struct AcSystem **out);

// Any built-in system from its JSON description, e.g. `{"kind":"burgers"}`.
//
// # Safety
// `json` must be a NUL-terminated string and `out` a valid pointer.
enum AcStatus ac_system_from_json(const char *json, struct AcSystem **out);

// # Safety
// `sys` must be null or a handle from `ac_system_new_*` not yet freed.
void ac_system_free(struct AcSystem *sys);

// Number of conserved components, or 0 for a null handle.
//
// # Safety
// `sys` must be null or a live handle.
size_t ac_system_dim(const struct AcSystem *sys);

// `f(u)` into `out[0..n]`.
//
// # Safety
// `u` and `out` must point to `n` doubles.
enum AcStatus ac_flux(const struct AcSystem *sys, const double *u, size_t n, double *out);

// `(η(u), q(u))`.
//
// # Safety
// `u` must point to `n` doubles; `eta` and `q` must be valid pointers.
enum AcStatus ac_entropy(const struct AcSystem *sys,
                         const double *u,
                         size_t n,
                         double *eta,
                         double *q);

// Eigenvalues of `f'(u)` in increasing order.
//
// # Safety
// `u` and `out` must point to `n` doubles.
enum AcStatus ac_eigenvalues(const struct AcSystem *sys, const double *u, size_t n, double *out);

// `η(a|b)` and, when `q` is non-null, `q(a;b)`.
//
// # Safety
// `a` and `b` must point to `n` doubles; `eta` must be valid, `q` may be null.
enum AcStatus ac_relative_entropy(const struct AcSystem *sys,
                                  const double *a,
                                  const double *b,
                                  size_t n,
                                  double *eta,
                                  double *q);

// Shock of strength `s0` from `base` (`u_L` for the first family, `u_R` for
// the last) with weights `a₁/a₂ = 1 + c s0`.
//
// # Safety
// `base` must point to `n` doubles and `out` be a valid pointer.
enum AcStatus ac_context_new(const struct AcSystem *sys,
                             const double *base,
                             size_t n,
                             enum AcFamily family,
                             double s0,
                             double c,
                             struct AcContext **out);

// Replaces the weight ratio `a₁/a₂` of a context.
//
// # Safety
// `ctx` must be a live handle.
enum AcStatus ac_context_set_weight_ratio(struct AcContext *ctx, double ratio);

// # Safety
// `ctx` must be null or a live handle.
void ac_context_free(struct AcContext *ctx);

// The shock as the original system sees it: `u_L`, `u_R` and `σ`.
//
// # Safety
// `u_left` and `u_right` must point to `n` doubles, `speed` be valid.
enum AcStatus ac_context_shock(const struct AcContext *ctx,
                               double *u_left,
                               double *u_right,
                               size_t n,
                               double *speed);

// `η̃(u) = a₁η(u|u_L) − a₂η(u|u_R)` in the context's reduced frame.
//
// # Safety
// `u` must point to `n` doubles and `out` be valid.
enum AcStatus ac_tilde_eta(const struct AcContext *ctx, const double *u, size_t n, double *out);

// `D_cont(u)`.
//
// # Safety
// `u` must point to `n` doubles and `out` be valid.
enum AcStatus ac_d_cont(const struct AcContext *ctx, const double *u, size_t n, double *out);

// `D_max(u)`, the dissipation of the maximal 1-shock from `u ∈ Π̄`.
//
// # Safety
// `u` must point to `n` doubles and `out` be valid.
enum AcStatus ac_d_max(const struct AcContext *ctx, const double *u, size_t n, double *out);

// Traces the extremal shock curve from `u0` up to arclength `s_max`.
//
// # Safety
// `u0` must point to `n` doubles and `out` be a valid pointer.
enum AcStatus ac_curve_trace(const struct AcSystem *sys,
                             const double *u0,
                             size_t n,
                             enum AcFamily family,
                             double s_max,
                             struct AcCurve **out);

// Arclength reached by the trace (less than `s_max` if it left the working box).
//
// # Safety
// `curve` must be null or a live handle.
double ac_curve_extent(const struct AcCurve *curve);

// State `S(s)` and speed `σ(s)` on the curve.
//
// # Safety
// `state_out` must point to `n` doubles and `speed` be valid.
enum AcStatus ac_curve_at(const struct AcCurve *curve,
                          double s,
                          double *state_out,
                          size_t n,
                          double *speed);

// # Safety
// `curve` must be null or a live handle.
void ac_curve_free(struct AcCurve *curve);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ACONTRACT_H */
