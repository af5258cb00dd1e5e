#ifndef TWISTGATE_H
#define TWISTGATE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes. The first three match the command-line exit codes.
 */
typedef enum TgStatus {
  TG_STATUS_OK = 0,
  TG_STATUS_CHECK_FAILED = 1,
  TG_STATUS_UNSUPPORTED = 2,
  TG_STATUS_NULL_POINTER = 3,
  TG_STATUS_INVALID_UTF8 = 4,
  TG_STATUS_PANIC = 5,
} TgStatus;

/**
 * Opaque curve handle.
 */
typedef struct TgCurve TgCurve;

/**
 * Summary of an L(E,1) estimate.
 */
typedef struct TgLValue {
  double value;
  double tail_bound;
  uint64_t terms_used;
  uint64_t conductor;
  int32_t root_number;
  bool nonzero_evidence;
  bool retried;
} TgLValue;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Looks up `label` in the curve table (honouring `TWISTGATE_CURVES`).
 *
 * # Safety
 * `label` must be a NUL-terminated string; `out` must be writable.
 */
enum TgStatus tg_curve_from_label(const char *label, struct TgCurve **out);

/**
 * Builds a curve from `[a1, a2, a3, a4, a6]`.
 *
 * # Safety
 * `coeffs` must point to five readable `int64_t`; `out` must be writable.
 */
enum TgStatus tg_curve_from_coeffs(const int64_t *coeffs, struct TgCurve **out);

/**
 * Releases a handle. Null is ignored.
 *
 * # Safety
 * `c` must come from this library and not have been freed.
 */
void tg_curve_free(struct TgCurve *c);

/**
 * Quadratic twist by squarefree `d`, as a new handle.
 *
 * # Safety
 * `c` must be a live handle; `out` must be writable.
 */
enum TgStatus tg_curve_twist(const struct TgCurve *c, int64_t d, struct TgCurve **out);

/**
 * j-invariant as a reduced fraction "num/den".
 *
 * # Safety
 * `c` must be a live handle; `out` must be writable.
 */
enum TgStatus tg_curve_j_invariant(const struct TgCurve *c, char **out);

/**
 * Discriminant as a decimal string.
 *
 * # Safety
 * `c` must be a live handle; `out` must be writable.
 */
enum TgStatus tg_curve_discriminant(const struct TgCurve *c, char **out);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void tg_string_free(char *s);

/**
 * Number of points over F_p, the point at infinity included.
 *
 * # Safety
 * `c` must be a live handle; `out` must be writable.
 */
enum TgStatus tg_count_points(const struct TgCurve *c, uint64_t p, uint64_t *out);

/**
 * # Safety
 * `c` must be a live handle; `out` must be writable.
 */
enum TgStatus tg_conductor(const struct TgCurve *c, uint64_t *out);

/**
 * Global root number (+1 or -1) from the product of local factors.
 *
 * # Safety
 * `c` must be a live handle; `out` must be writable.
 */
enum TgStatus tg_global_root_number(const struct TgCurve *c, int32_t *out);

/**
 * Root number of the twist by `d` predicted by (d/N) w(E).
 *
 * # Safety
 * `c` must be a live handle; `out` must be writable.
 */
enum TgStatus tg_twist_root_number_formula(const struct TgCurve *c, int64_t d, int32_t *out);

/**
 * Estimate of L(E,1). `terms = 0` picks the default; `margin <= 0` uses 10.
 * Returns `CheckFailed` when the evidence is inconclusive; `out` is filled
 * in either case.
 *
 * # Safety
 * `c` must be a live handle; `out` must be writable.
 */
enum TgStatus tg_l_value(const struct TgCurve *c,
                         size_t terms,
                         double margin,
                         struct TgLValue *out);

/**
 * Checks Serre's criterion hypotheses mod `ell` with auxiliary prime `aux`
 * (`aux = 0` picks the first prime of good reduction other than `ell`).
 *
 * # Safety
 * `c` must be a live handle; `pass` must be writable.
 */
enum TgStatus tg_serre_check(const struct TgCurve *c, uint64_t ell, uint64_t aux, bool *pass);

/**
 * Runs every character twist of X0(3p) over Q(sqrt d_1, ..., sqrt d_r) and
 * writes the report as JSON. Returns `Ok` only for a verified report,
 * `Unsupported` for a non-admissible tuple.
 *
 * # Safety
 * `ds` must point to `len` readable values; `out_json` must be writable.
 */
enum TgStatus tg_check_hypothesis_json(uint64_t p, const uint64_t *ds, size_t len, char **out_json);

/**
 * Message for the last failure on this thread, or null. Valid until the
 * next call into the library from the same thread.
 */
const char *tg_last_error_message(void);

/**
 * Static description of a status code.
 */
const char *tg_status_str(enum TgStatus status);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TWISTGATE_H */
