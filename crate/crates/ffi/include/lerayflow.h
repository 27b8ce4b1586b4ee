#ifndef LERAYFLOW_H
#define LERAYFLOW_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes.
typedef enum LfStatus {
  LF_STATUS_OK = 0,
  LF_STATUS_NULL_ARGUMENT = 1,
  // Malformed or invalid configuration.
  LF_STATUS_CONFIG = 2,
  LF_STATUS_INVALID_ARGUMENT = 3,
  // The request needs more resolution than configured.
  LF_STATUS_RESOLUTION = 4,
  // The run hit the blow-up threshold or the minimum step.
  LF_STATUS_TERMINAL = 5,
  LF_STATUS_IO = 6,
  // The caller's buffer is too small; the required length was written.
  LF_STATUS_BUFFER_TOO_SMALL = 7,
  // Internal failure (a caught panic).
  LF_STATUS_INTERNAL = 8,
} LfStatus;

// A configured problem and its current state.
typedef struct LfSolver LfSolver;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Version tag of the files and reports the library writes.
uint32_t lf_format_version(void);

// Message of the last failure on this thread; empty when none. The pointer
// stays valid until the next failing call on the same thread.
const char *lf_last_error(void);

// Build a solver from a JSON run configuration. On success `*out` holds a
// handle to release with [`lf_solver_free`].
//
// # Safety
// `config_json` must be a nul-terminated string and `out` a valid pointer.
enum LfStatus lf_solver_new(const char *config_json, struct LfSolver **out);

// Release a solver. Null is ignored.
//
// # Safety
// `solver` must come from [`lf_solver_new`] and not be used afterwards.
void lf_solver_free(struct LfSolver *solver);

// Number of Galerkin coefficients.
//
// # Safety
// `solver` and `out` must be valid pointers.
enum LfStatus lf_solver_dim(const struct LfSolver *solver, size_t *out);

// Current time of the solver state.
//
// # Safety
// `solver` and `out` must be valid pointers.
enum LfStatus lf_solver_time(const struct LfSolver *solver, double *out);

// Integrate from the current time to `t_end` with the configured stepper.
// Returns [`LfStatus::Terminal`] when the run stops early; the state is
// then left at the last finite sample.
//
// # Safety
// `solver` must be a valid pointer.
enum LfStatus lf_solver_advance(struct LfSolver *solver, double t_end);

// Copy the coefficient vector into `buf`. With a short buffer nothing is
// copied, `*needed` receives the dimension and the call returns
// [`LfStatus::BufferTooSmall`].
//
// # Safety
// `buf` must hold `len` doubles; `needed` may be null.
enum LfStatus lf_solver_coefficients(const struct LfSolver *solver,
                                     double *buf,
                                     size_t len,
                                     size_t *needed);

// `‖u‖₂` and `‖∇u‖₂²` of the velocity at the current time.
//
// # Safety
// All pointers must be valid.
enum LfStatus lf_solver_norms(const struct LfSolver *solver, double *l2, double *enstrophy_out);

// Velocity at the point `x[0..3]`, written to `out[0..3]`.
//
// # Safety
// `x` and `out` must each point to three doubles.
enum LfStatus lf_solver_evaluate(const struct LfSolver *solver, const double *x, double *out);

// Run the invariant suite for a JSON configuration. `*report` receives the
// report as JSON, to release with [`lf_string_free`]; `*all_pass` is 1 when
// every check passed.
//
// # Safety
// `config_json` must be a nul-terminated string; `report` and `all_pass`
// valid pointers.
enum LfStatus lf_verify(const char *config_json, char **report, int32_t *all_pass);

// Release a string returned by this library. Null is ignored.
//
// # Safety
// `s` must come from this library and not be used afterwards.
void lf_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LERAYFLOW_H */
