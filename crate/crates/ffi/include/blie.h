#ifndef BLIE_H
#define BLIE_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every fallible call.
typedef enum BlieStatus {
  BLIE_STATUS_OK = 0,
  BLIE_STATUS_NULL_POINTER = 1,
  BLIE_STATUS_INVALID_UTF8 = 2,
  BLIE_STATUS_INVALID_ARGUMENT = 3,
  BLIE_STATUS_CONFIG = 4,
  BLIE_STATUS_BUDGET_TOO_SMALL = 5,
  BLIE_STATUS_RESOURCE_LIMIT = 6,
  BLIE_STATUS_INVALID_LOSS = 7,
  BLIE_STATUS_EVALUATOR = 8,
  BLIE_STATUS_OVERFLOW = 9,
  // The requested value does not exist (e.g. regret without a known optimum).
  BLIE_STATUS_NOT_AVAILABLE = 10,
  BLIE_STATUS_INTERNAL = 11,
  BLIE_STATUS_PANIC = 12,
} BlieStatus;

// An objective built from a JSON instance descriptor.
typedef struct BlieInstance BlieInstance;

// The record of one finished run.
typedef struct BlieTrace BlieTrace;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null if none. The
// pointer stays valid until the next failing call on the same thread.
const char *blie_last_error(void);

// Library version as a static NUL-terminated string.
const char *blie_version(void);

// Builds an instance from a JSON descriptor such as
// `{"kind":"toy","variant":"mu1","d":2,"sigma":0.1}`.
//
// # Safety
// `descriptor_json` must be a NUL-terminated string and `out` a valid
// pointer. On success `*out` owns a handle to free with [`blie_instance_free`].
enum BlieStatus blie_instance_new(const char *descriptor_json,
                                  uint64_t seed,
                                  struct BlieInstance **out);

// # Safety
// `instance` must come from [`blie_instance_new`] and not be used afterwards.
// Null is ignored.
void blie_instance_free(struct BlieInstance *instance);

// Dimension of the instance, or 0 for a null handle.
//
// # Safety
// `instance` must be null or a live handle.
size_t blie_instance_dim(const struct BlieInstance *instance);

// Runs an algorithm, given as JSON (e.g. `{"name":"blie"}` or
// `{"name":"hyperband","eta":3}`), with total budget `total_budget`.
// `parallelism = 0` uses every logical core.
//
// # Safety
// `instance` must be a live handle, `algorithm_json` a NUL-terminated string
// and `out` a valid pointer. On success `*out` owns a handle to free with
// [`blie_trace_free`].
enum BlieStatus blie_run(const struct BlieInstance *instance,
                         const char *algorithm_json,
                         uint64_t total_budget,
                         uint64_t seed,
                         size_t parallelism,
                         struct BlieTrace **out);

// # Safety
// `trace` must come from [`blie_run`] and not be used afterwards. Null is
// ignored.
void blie_trace_free(struct BlieTrace *trace);

// Budget consumed by the run, or 0 for a null handle.
//
// # Safety
// `trace` must be null or a live handle.
uint64_t blie_trace_total_spent(const struct BlieTrace *trace);

// Number of executor batches (clean-up included), or 0 for a null handle.
//
// # Safety
// `trace` must be null or a live handle.
size_t blie_trace_batch_count(const struct BlieTrace *trace);

// Observed loss of the output arm, or NaN for a null handle.
//
// # Safety
// `trace` must be null or a live handle.
double blie_trace_best_loss(const struct BlieTrace *trace);

// Simple regret of the output arm. Returns `NotAvailable` when the
// instance has no known optimum.
//
// # Safety
// `trace` must be a live handle and `out` a valid pointer.
enum BlieStatus blie_trace_simple_regret(const struct BlieTrace *trace, double *out);

// Copies the output arm into `buf` (up to `len` coordinates) and returns
// its dimension, so a call with `len = 0` queries the size. Returns 0 for
// a null handle.
//
// # Safety
// `trace` must be null or a live handle; `buf` must hold `len` doubles
// when `len > 0`.
size_t blie_trace_output(const struct BlieTrace *trace, double *buf, size_t len);

// Serializes the full trace as JSON. On success `*out` owns a string to
// release with [`blie_string_free`].
//
// # Safety
// `trace` must be a live handle and `out` a valid pointer.
enum BlieStatus blie_trace_to_json(const struct BlieTrace *trace, char **out);

// # Safety
// `s` must come from this library and not be used afterwards. Null is
// ignored.
void blie_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BLIE_H */
