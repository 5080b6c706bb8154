#ifndef RLCM_H
#define RLCM_H

/* Generated by cbindgen from rlcm-capi; edit src/lib.rs instead. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Call completed.
#define RLCM_OK 0

// Caller error at the interface: null handle, undersized buffer, bad enum.
#define RLCM_ERR_USAGE 1

// The model layer rejected the configuration or the data.
#define RLCM_ERR_INVALID 2

// The sampler hit a numerical failure it could not recover from.
#define RLCM_ERR_NUMERICAL 3

// An internal panic was caught at the boundary.
#define RLCM_ERR_PANIC 4

// Parameter blocks recorded by a fit, for `rlcm_fit_block_*` calls.
typedef enum {
  // Measurement coefficients, J * H columns.
  RLCM_BLOCK_BETA = 0,
  // Inclusion indicators (0/1 draws), J * H columns.
  RLCM_BLOCK_DELTA = 1,
  // Free response cutpoints, sum over items of (M_j - 2) columns.
  RLCM_BLOCK_KAPPA = 2,
  // Structural regression coefficients, D * K columns.
  RLCM_BLOCK_LAMBDA = 3,
  // Attribute correlations, K * (K - 1) / 2 columns.
  RLCM_BLOCK_R = 4,
  // Free attribute thresholds, K * (L - 2) columns.
  RLCM_BLOCK_GAMMA = 5,
  // Inclusion probability, 1 column.
  RLCM_BLOCK_OMEGA = 6,
} RlcmBlock;

// Opaque handle to one fitted chain; same forward-declaration contract
// as [`RlcmSim`].
typedef struct RlcmFit RlcmFit;

// Opaque handle to a simulated dataset. Not repr(C) on purpose: the
// header carries only a forward declaration, so C code handles pointers
// and never the layout.
typedef struct RlcmSim RlcmSim;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *rlcm_version(void);

// Copies the message from the most recent failing call on this thread into
// `buf` (NUL-terminated, truncated to `cap` bytes) and returns the full
// length the message needs including the terminator. `buf` may be null or
// `cap` zero to query the length alone. Successful calls clear the slot.
//
// # Safety
//
// `buf`, when non-null, must point to `cap` writable bytes.
size_t rlcm_last_error(char *buf, size_t cap);

// Simulates one dataset: `n` respondents answering `j` ternary items
// driven by `k` ordinal attributes with `l` levels each and pairwise
// latent correlation `rho`, keeping interactions up to `order`. The
// drawn truth is internal to the handle; fetch the observables with the
// `rlcm_sim_*` accessors and free the handle with `rlcm_sim_free`.
//
// # Safety
//
// `out` must be a valid pointer to an `RlcmSim*` slot.
int rlcm_simulate(size_t n,
                  size_t j,
                  size_t k,
                  size_t l,
                  double rho,
                  size_t order,
                  uint64_t seed,
                  RlcmSim **out);

// Releases a simulation handle. Null is a no-op.
//
// # Safety
//
// `sim` must be null or a handle returned by `rlcm_simulate` that has not
// been freed already.
void rlcm_sim_free(RlcmSim *sim);

// Respondent count, or 0 on a null handle.
//
// # Safety
//
// `sim` must be null or a live handle from `rlcm_simulate`.
size_t rlcm_sim_rows(const RlcmSim *sim);

// Item count, or 0 on a null handle.
//
// # Safety
//
// `sim` must be null or a live handle from `rlcm_simulate`.
size_t rlcm_sim_items(const RlcmSim *sim);

// Attribute count, or 0 on a null handle.
//
// # Safety
//
// `sim` must be null or a live handle from `rlcm_simulate`.
size_t rlcm_sim_attributes(const RlcmSim *sim);

// Covariate column count including the intercept, or 0 on a null handle.
//
// # Safety
//
// `sim` must be null or a live handle from `rlcm_simulate`.
size_t rlcm_sim_covariates(const RlcmSim *sim);

// Copies the response matrix, row-major rows x items, levels 0..M-1.
//
// # Safety
//
// `sim` must be a live handle; `buf` must hold `cap` writable elements.
int rlcm_sim_responses(const RlcmSim *sim, uint8_t *buf, size_t cap);

// Copies the covariate matrix, row-major rows x covariates, intercept in
// column 0.
//
// # Safety
//
// `sim` must be a live handle; `buf` must hold `cap` writable elements.
int rlcm_sim_covariate_matrix(const RlcmSim *sim, double *buf, size_t cap);

// Copies the true attribute profiles, row-major rows x attributes, levels
// 0..L-1.
//
// # Safety
//
// `sim` must be a live handle; `buf` must hold `cap` writable elements.
int rlcm_sim_profiles(const RlcmSim *sim, uint8_t *buf, size_t cap);

// Fits one chain to response matrix `y` (row-major `n` x `j`, levels from
// 0; per-item level counts are inferred from the data) with covariate
// matrix `x` (row-major `n` x `d`, include your own intercept column),
// modeling `k` attributes with `l` levels and interactions up to `order`.
// Runs `chain_length` iterations, discards `burnin`, and records the rest.
// Same seed, same inputs: identical draws. Free with `rlcm_fit_free`.
//
// # Safety
//
// `y` must hold `n * j` elements, `x` must hold `n * d` elements, and
// `out` must be a valid pointer to an `RlcmFit*` slot.
int rlcm_fit(const uint8_t *y,
             size_t n,
             size_t j,
             const double *x,
             size_t d,
             size_t k,
             size_t l,
             size_t order,
             size_t chain_length,
             size_t burnin,
             uint64_t seed,
             RlcmFit **out);

// Releases a fit handle. Null is a no-op.
//
// # Safety
//
// `fit` must be null or a handle returned by `rlcm_fit` that has not been
// freed already.
void rlcm_fit_free(RlcmFit *fit);

// Recorded (post-burn-in) draw count, or 0 on a null handle.
//
// # Safety
//
// `fit` must be null or a live handle from `rlcm_fit`.
size_t rlcm_fit_draws(const RlcmFit *fit);

// Respondent count the fit was run on, or 0 on a null handle.
//
// # Safety
//
// `fit` must be null or a live handle from `rlcm_fit`.
size_t rlcm_fit_rows(const RlcmFit *fit);

// Attribute count of the fitted model, or 0 on a null handle.
//
// # Safety
//
// `fit` must be null or a live handle from `rlcm_fit`.
size_t rlcm_fit_attributes(const RlcmFit *fit);

// Column count of one parameter block (an `RlcmBlock` value), 0 on a null
// handle or unknown block. Blocks with nothing to sample (for example
// Gamma at l = 2) have width 0.
//
// # Safety
//
// `fit` must be null or a live handle from `rlcm_fit`.
size_t rlcm_fit_block_width(const RlcmFit *fit, int block);

// Posterior mean of every column of one parameter block, in the block's
// column order. `cap` must cover `rlcm_fit_block_width` elements.
//
// # Safety
//
// `fit` must be a live handle; `buf` must hold `cap` writable elements.
int rlcm_fit_block_mean(const RlcmFit *fit, int block, double *buf, size_t cap);

// Geweke convergence score of every column of one parameter block: the
// standardized mean difference between early and late chain segments,
// NaN where the column is too short or constant. `cap` must cover
// `rlcm_fit_block_width` elements.
//
// # Safety
//
// `fit` must be a live handle; `buf` must hold `cap` writable elements.
int rlcm_fit_block_geweke(const RlcmFit *fit, int block, double *buf, size_t cap);

// Most-visited post-burn-in level of every respondent-attribute pair,
// row-major rows x attributes. `cap` must cover
// `rlcm_fit_rows * rlcm_fit_attributes` elements.
//
// # Safety
//
// `fit` must be a live handle; `buf` must hold `cap` writable elements.
int rlcm_fit_modal_profiles(const RlcmFit *fit, uint8_t *buf, size_t cap);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RLCM_H */
