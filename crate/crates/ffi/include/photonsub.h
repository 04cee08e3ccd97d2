#ifndef PHOTONSUB_H
#define PHOTONSUB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every fallible call.
typedef enum PsStatus {
  PS_STATUS_OK = 0,
  PS_STATUS_NULL_POINTER = 1,
  // A parameter violates its guard or an argument is out of range.
  PS_STATUS_INVALID_ARGUMENT = 2,
  // Both detectors click with negligible probability.
  PS_STATUS_ZERO_SUCCESS = 3,
  // The four-mode oracle refused the input (mixed state or cutoff too large).
  PS_STATUS_UNSUPPORTED = 4,
  // A numerical check failed (positivity, Hermiticity, optimizer bracket).
  PS_STATUS_NUMERICAL = 5,
  PS_STATUS_BUFFER_TOO_SMALL = 6,
  // An unexpected internal failure was caught at the boundary.
  PS_STATUS_INTERNAL = 7,
} PsStatus;

// Detector model selector for [`ps_params_set_detector_model`].
typedef enum PsDetectorModel {
  PS_DETECTOR_MODEL_ANCILLA_LOSS = 0,
  PS_DETECTOR_MODEL_REPARAMETRIZED = 1,
  PS_DETECTOR_MODEL_REPARAMETRIZED_WITHOUT_LOSS = 2,
} PsDetectorModel;

// Result of one protocol run.
typedef struct PsOutcome PsOutcome;

// Protocol parameters.
typedef struct PsParams PsParams;

// Optimal real displacement `α = −β`.
typedef struct PsOptimum {
  double alpha_opt;
  double e_n_at_opt;
  double p_succ_at_opt;
  uint32_t iterations;
  double bracket_lo;
  double bracket_hi;
} PsOptimum;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Creates parameters with perfect detectors, no loss, no local operation and
// cutoff 10. Values are checked when a protocol runs.
struct PsParams *ps_params_new(double lambda, double reflectance);

// # Safety
// `params` must come from [`ps_params_new`] and not be freed twice.
void ps_params_free(struct PsParams *params);

// # Safety
// `params` must be a live handle or null.
enum PsStatus ps_params_set_eta(struct PsParams *params, double eta);

// # Safety
// `params` must be a live handle or null.
enum PsStatus ps_params_set_nu(struct PsParams *params, double nu);

// # Safety
// `params` must be a live handle or null.
enum PsStatus ps_params_set_cutoff(struct PsParams *params, uint32_t cutoff);

// Local displacements `D_A(α) ⊗ D_B(β)`.
//
// # Safety
// `params` must be a live handle or null.
enum PsStatus ps_params_set_displacement(struct PsParams *params,
                                         double alpha_re,
                                         double alpha_im,
                                         double beta_re,
                                         double beta_im);

// Equal local squeezing `S_A(s) ⊗ S_B(s)`.
//
// # Safety
// `params` must be a live handle or null.
enum PsStatus ps_params_set_squeezing(struct PsParams *params, double s);

// # Safety
// `params` must be a live handle or null.
enum PsStatus ps_params_clear_local_op(struct PsParams *params);

// `model` takes a [`PsDetectorModel`] value.
//
// # Safety
// `params` must be a live handle or null.
enum PsStatus ps_params_set_detector_model(struct PsParams *params, uint32_t model);

// Checks every guard without running the protocol.
//
// # Safety
// `params` must be a live handle or null.
enum PsStatus ps_params_validate(const struct PsParams *params);

// Runs the realistic protocol. On success `*out` receives a new outcome.
//
// # Safety
// `params` must be a live handle; `out` must be writable.
enum PsStatus ps_run_realistic(const struct PsParams *params, struct PsOutcome **out);

// Runs the four-mode oracle (pure input, cutoff at most 10).
//
// # Safety
// `params` must be a live handle; `out` must be writable.
enum PsStatus ps_run_bruteforce(const struct PsParams *params, struct PsOutcome **out);

// # Safety
// `outcome` must come from a run function and not be freed twice.
void ps_outcome_free(struct PsOutcome *outcome);

// # Safety
// `outcome` must be a live handle; `value` must be writable.
enum PsStatus ps_outcome_success_probability(const struct PsOutcome *outcome, double *value);

// Logarithmic negativity (base 2) of the normalized output.
//
// # Safety
// `outcome` must be a live handle; `value` must be writable.
enum PsStatus ps_outcome_log_negativity(const struct PsOutcome *outcome, double *value);

// Side length `(cutoff + 1)²` of the output density matrix, or 0 for null.
//
// # Safety
// `outcome` must be a live handle or null.
size_t ps_outcome_dimension(const struct PsOutcome *outcome);

// Copies the output density matrix in row-major order into `re` and `im`,
// each holding at least `len = dimension²` doubles. `normalized` selects
// the trace-one state; otherwise the trace equals the success probability.
//
// # Safety
// `re` and `im` must point to `len` writable doubles.
enum PsStatus ps_outcome_density_matrix(const struct PsOutcome *outcome,
                                        bool normalized,
                                        double *re,
                                        double *im,
                                        size_t len);

// Optimizes the real displacement `α = −β ∈ (0, 1]`; the local operation in
// `params` is ignored.
//
// # Safety
// `params` must be a live handle; `out` must be writable.
enum PsStatus ps_optimize_displacement(const struct PsParams *params, struct PsOptimum *out);

// Message of the last failed call on this thread; empty after a success.
// The pointer stays valid until the next call on the same thread.
const char *ps_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *ps_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PHOTONSUB_H */
