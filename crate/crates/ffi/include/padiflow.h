/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#ifndef PADIFLOW_H
#define PADIFLOW_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every call. Zero is success.
typedef enum PadiflowStatus {
  PADIFLOW_STATUS_OK = 0,
  PADIFLOW_STATUS_NULL_POINTER = 1,
  PADIFLOW_STATUS_INVALID_UTF8 = 2,
  PADIFLOW_STATUS_PARSE = 3,
  PADIFLOW_STATUS_INVALID_ARGUMENT = 4,
  PADIFLOW_STATUS_HYPOTHESIS_VIOLATED = 5,
  PADIFLOW_STATUS_PRECONDITION_VIOLATED = 6,
  PADIFLOW_STATUS_BAD_REDUCTION = 7,
  PADIFLOW_STATUS_INSUFFICIENT_BUDGET = 8,
  PADIFLOW_STATUS_UNDECIDED = 9,
  // A Rust panic was caught at the boundary.
  PADIFLOW_STATUS_PANIC = 10,
} PadiflowStatus;

// Outcome of the p-closure test at one prime.
typedef enum PadiflowClosure {
  PADIFLOW_CLOSURE_CLOSED = 0,
  PADIFLOW_CLOSURE_NOT_CLOSED = 1,
  PADIFLOW_CLOSURE_BAD_REDUCTION = 2,
} PadiflowClosure;

// A planar polynomial vector field.
typedef struct PadiflowField PadiflowField;

// An ODE instance `x y' + alpha y = a + b y + sum c_m y^m` with its radius.
typedef struct PadiflowOde PadiflowOde;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *padiflow_version(void);

// Message of the last failed call on this thread, or NULL if none failed yet.
//
// The pointer stays valid until the next failing call on the same thread.
const char *padiflow_last_error(void);

// # Safety
// `s` must be NULL or a string returned by this library, not yet freed.
void padiflow_string_free(char *s);

// Builds a field from `{"P": [[[i, j], "q"], ...], "Q": [...]}`.
//
// # Safety
// `json` must be NULL or a NUL-terminated string; `out` must be NULL or writable.
enum PadiflowStatus padiflow_field_from_json(const char *json, struct PadiflowField **out);

// # Safety
// `field` must be NULL or a handle from this library, not yet freed.
void padiflow_field_free(struct PadiflowField *field);

// The field back as JSON.
//
// # Safety
// `field` must be a live handle; `out_json` must be writable.
enum PadiflowStatus padiflow_field_to_json(const struct PadiflowField *field, char **out_json);

// Singularity class at the origin, as JSON.
//
// # Safety
// `field` must be a live handle; `out_json` must be writable.
enum PadiflowStatus padiflow_field_classify(const struct PadiflowField *field, char **out_json);

// Separatrix `x_which = phi(x_other)` through order `order`, as a series
// JSON object. `which` is 1 or 2; the field must be `x1 d1 + (lambda x2 + ...) d2`.
//
// # Safety
// `field` must be a live handle; `out_json` must be writable.
enum PadiflowStatus padiflow_field_separatrix(const struct PadiflowField *field,
                                              uint8_t which,
                                              size_t order,
                                              char **out_json);

// Strict transform in blow-up chart 1 or 2, as a new handle.
//
// # Safety
// `field` must be a live handle; `out` must be writable.
enum PadiflowStatus padiflow_field_blowup(const struct PadiflowField *field,
                                          uint8_t chart,
                                          struct PadiflowField **out);

// Whether the reduction mod `p` is closed under `p`-th powers.
//
// # Safety
// `field` must be a live handle; `out` must be writable.
enum PadiflowStatus padiflow_field_p_closed(const struct PadiflowField *field,
                                            uint64_t p,
                                            enum PadiflowClosure *out);

// Builds an ODE instance from `{"a", "b"?, "c"?, "s", "t", "p", "logr"?}`.
//
// # Safety
// `json` must be NULL or a NUL-terminated string; `out` must be NULL or writable.
enum PadiflowStatus padiflow_ode_from_json(const char *json, struct PadiflowOde **out);

// # Safety
// `ode` must be NULL or a handle from this library, not yet freed.
void padiflow_ode_free(struct PadiflowOde *ode);

// Coefficient-recursion solution through `order`, as a series JSON object.
//
// # Safety
// `ode` must be a live handle; `out_json` must be writable.
enum PadiflowStatus padiflow_ode_solve_direct(const struct PadiflowOde *ode,
                                              size_t order,
                                              char **out_json);

// Newton solution with its radius ledger: `{"y": ..., "ledger": ...}`.
// Fails with `HYPOTHESIS_VIOLATED` when the norm hypotheses do not hold.
//
// # Safety
// `ode` must be a live handle; `out_json` must be writable.
enum PadiflowStatus padiflow_ode_solve_newton(const struct PadiflowOde *ode,
                                              size_t order,
                                              char **out_json);

// Smallest `k` with `(k + 1) / 2^k <= 1/p^2`.
//
// # Safety
// `out` must be writable.
enum PadiflowStatus padiflow_find_k1(uint64_t p, uint32_t *out);

// Partial sum over primes up to `p_max` and tail enclosure, as JSON, with
// the default constant.
//
// # Safety
// `out_json` must be writable.
enum PadiflowStatus padiflow_budget(uint64_t s, uint64_t t, uint64_t p_max, char **out_json);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PADIFLOW_H */
