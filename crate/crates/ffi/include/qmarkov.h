/* C ABI for the qmarkov toolkit. Generated by cbindgen; do not edit. */

#ifndef QMARKOV_H
#define QMARKOV_H

/* This file is auto-generated from crates/ffi/src/lib.rs. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Status codes returned by every fallible call.
typedef enum QmStatus {
  // Success.
  QM_STATUS_OK = 0,
  // A pointer argument was null.
  QM_STATUS_NULL_POINTER = 1,
  // Malformed input (JSON, UTF-8 or parameter validation).
  QM_STATUS_INVALID_INPUT = 2,
  // The computation reported a failure (see qm_last_error).
  QM_STATUS_COMPUTATION_FAILED = 3,
} QmStatus;

// Opaque handle to a standard-form state (a faithful density matrix with
// its cached modular data).
typedef struct QmState QmState;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message describing the most recent failure on this thread, or null. The
// pointer stays valid until the next qmarkov call on the same thread; do
// not free it.
const char *qm_last_error(void);

// Release a string returned through a `char **` out-parameter.
//
// # Safety
// `s` must be a pointer previously returned by this library and not freed.
void qm_string_free(char *s);

// Parse a state from its JSON form `{"dim": n, "rho": <matrix>}`.
//
// # Safety
// `json` must be a valid NUL-terminated string and `out` a valid pointer.
enum QmStatus qm_state_parse(const char *json, struct QmState **out);

// Algebra dimension n of the state, or 0 for a null handle.
//
// # Safety
// `state` must be null or a live handle from [`qm_state_parse`].
uintptr_t qm_state_dim(const struct QmState *state);

// Release a state handle.
//
// # Safety
// `state` must come from [`qm_state_parse`] and not be freed twice.
void qm_state_free(struct QmState *state);

// Run the markovization pipeline on a witness family given as
// `{"maps": [<cp map>, ...]}`; writes the output maps and stage report as
// JSON.
//
// # Safety
// `state` must be a live handle, `maps_json` a valid string pointer and
// `out_json` a valid output slot.
enum QmStatus qm_markovize(const struct QmState *state,
                           const char *maps_json,
                           uint32_t eps_lo,
                           uint32_t eps_hi,
                           char **out_json);

// Synthesize the Markov semigroup of a KMS-symmetric witness family and
// reconstruct snapshots at the given times; writes the spectral dump,
// snapshots and synthesis report as JSON.
//
// # Safety
// Pointer arguments as in [`qm_markovize`]; `times` must point to
// `times_len` doubles (may be null when `times_len` is 0).
enum QmStatus qm_semigroup(const struct QmState *state,
                           const char *maps_json,
                           const double *times,
                           uintptr_t times_len,
                           uintptr_t cone_levels,
                           char **out_json);

// Run the verification suites. `samples` of 0 and a non-finite or
// non-positive `tol` mean "per-check defaults"; `dims`/`dims_len` select
// the random-instance dimensions (null/0 for the default {2,3,4}).
// `all_passed` (optional) reports the overall verdict; the JSON report is
// always written on `Ok`.
//
// # Safety
// `dims` must point to `dims_len` entries when non-null; `out_json` must be
// a valid output slot.
enum QmStatus qm_verify(uint64_t seed,
                        uintptr_t samples,
                        double tol,
                        const uintptr_t *dims,
                        uintptr_t dims_len,
                        bool *all_passed,
                        char **out_json);

// Spectral CSV `s,n_s,lambda_exact,lambda_float,d_s` of the free orthogonal
// quantum group model for N ≥ 2.
//
// # Safety
// `out_csv` must be a valid output slot.
enum QmStatus qm_onplus_csv(uint64_t n, uintptr_t s_max, char **out_csv);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QMARKOV_H */
