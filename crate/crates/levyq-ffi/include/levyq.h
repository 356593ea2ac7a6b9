#ifndef LEVYQ_H
#define LEVYQ_H

/* Generated by cbindgen from the levyq-ffi crate; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status codes returned by every `levyq_*` call.
typedef enum LevyqStatus {
  LEVYQ_STATUS_OK = 0,
  LEVYQ_STATUS_INVALID_ARGUMENT = 1,
  LEVYQ_STATUS_PARSE_ERROR = 2,
  LEVYQ_STATUS_MODEL_ERROR = 3,
  LEVYQ_STATUS_MATH_ERROR = 4,
  LEVYQ_STATUS_BUDGET_EXHAUSTED = 5,
  LEVYQ_STATUS_INTERNAL_PANIC = 6,
} LevyqStatus;

// Regime tag mirrored into C.
typedef enum LevyqRegime {
  LEVYQ_REGIME_CRAMER = 0,
  LEVYQ_REGIME_POSITIVE_DRIFT = 1,
  LEVYQ_REGIME_NEITHER = 2,
} LevyqRegime;

// Opaque limit-law evaluator handle (thread-safe, immutable).
typedef struct LevyqLimitLaw LevyqLimitLaw;

// Opaque validated model handle.
typedef struct LevyqModel LevyqModel;

// Opaque batch of overflow samples.
typedef struct LevyqSamples LevyqSamples;

// One overflow record in the flat sample buffer.
typedef struct LevyqSample {
  double undershoot;
  double overshoot;
  double passage_time;
  double weight;
} LevyqSample;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copy the last error message for this thread into `buf` (NUL-terminated,
// truncated to `len`). Returns the full message length in bytes.
//
// # Safety
// `buf` must point to at least `len` writable bytes (or be null with len 0).
size_t levyq_last_error(char *buf, size_t len);

// Parse and validate a model from its JSON spec.
//
// # Safety
// `json` must be a NUL-terminated UTF-8 string; `out` must be valid.
enum LevyqStatus levyq_model_from_json(const char *json, struct LevyqModel **out);

// Build the classical M/M/1 net-input model (arrivals λ, Exp(μ) jobs).
//
// # Safety
// `out` must be valid.
enum LevyqStatus levyq_model_mm1(double lambda, double mu, struct LevyqModel **out);

// # Safety
// `model` must come from a `levyq_model_*` constructor; double frees are UB.
void levyq_model_free(struct LevyqModel *model);

// Regime tag plus its parameter (γ for Cramér, E[X(1)] for positive drift,
// 0 otherwise).
//
// # Safety
// All pointers must be valid.
enum LevyqStatus levyq_model_regime(const struct LevyqModel *model,
                                    enum LevyqRegime *tag,
                                    double *param);

// Build the limit-law evaluator for the model's regime.
//
// # Safety
// `model` and `out` must be valid.
enum LevyqStatus levyq_limit_law_new(const struct LevyqModel *model, struct LevyqLimitLaw **out);

// # Safety
// `law` must come from `levyq_limit_law_new`; double frees are UB.
void levyq_limit_law_free(struct LevyqLimitLaw *law);

// Evaluate the joint limiting CCDF `P(undershoot > u, overshoot > v)`.
//
// # Safety
// `law` and `out` must be valid.
enum LevyqStatus levyq_limit_law_ccdf(const struct LevyqLimitLaw *law,
                                      double u,
                                      double v,
                                      double *out);

// Joint density along the queue formula, when the job law has one.
//
// # Safety
// `model` and `out` must be valid.
enum LevyqStatus levyq_queue_density(const struct LevyqModel *model,
                                     double u,
                                     double v,
                                     double *out);

// Plain Monte Carlo overflow records of the reflected workload.
//
// # Safety
// `model` and `out` must be valid.
enum LevyqStatus levyq_sample_overflow(const struct LevyqModel *model,
                                       double x,
                                       uint64_t n,
                                       uint64_t seed,
                                       struct LevyqSamples **out);

// Importance-sampled passage records under the Cramér tilt, weighted by
// `e^{−γ·overshoot}`.
//
// # Safety
// `model` and `out` must be valid.
enum LevyqStatus levyq_sample_tilted(const struct LevyqModel *model,
                                     double x,
                                     uint64_t n,
                                     uint64_t seed,
                                     struct LevyqSamples **out);

// # Safety
// `samples` must come from a sampler; double frees are UB.
void levyq_samples_free(struct LevyqSamples *samples);

// Number of records in the batch.
//
// # Safety
// `samples` must be valid.
size_t levyq_samples_len(const struct LevyqSamples *samples);

// Copy up to `cap` records into `out`. Returns the number copied.
//
// # Safety
// `out` must point to at least `cap` writable `LevyqSample` slots.
size_t levyq_samples_copy(const struct LevyqSamples *samples, struct LevyqSample *out, size_t cap);

// Importance-sampled overflow probability `P(T(x) < ∞)` with its standard
// error; Cramér regime only.
//
// # Safety
// All pointers must be valid.
enum LevyqStatus levyq_ruin_estimate(const struct LevyqModel *model,
                                     double x,
                                     uint64_t n,
                                     uint64_t seed,
                                     double *estimate,
                                     double *standard_error);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LEVYQ_H */
