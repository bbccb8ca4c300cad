#ifndef CONDBENCH_H
#define CONDBENCH_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes.
 */
typedef enum CbStatus {
  CB_STATUS_OK = 0,
  CB_STATUS_NULL_POINTER = 1,
  CB_STATUS_INVALID_ARGUMENT = 2,
  CB_STATUS_INVALID_CONFIG = 3,
  CB_STATUS_IO = 4,
  CB_STATUS_NOT_RUN = 5,
  CB_STATUS_PANIC = 6,
} CbStatus;

/**
 * An environment instance.
 */
typedef struct CbEnv CbEnv;

/**
 * A parsed experiment and, after `cb_experiment_run`, its results.
 */
typedef struct CbExperiment CbExperiment;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread. Valid until the next
 * call that fails on the same thread.
 */
const char *cb_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *cb_version(void);

/**
 * Trace conditioning with ISI integer-uniform on `[isi_low, isi_high]` and
 * default timing otherwise.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum CbStatus cb_env_new_trace_conditioning(uint32_t isi_low,
                                            uint32_t isi_high,
                                            uint64_t seed,
                                            struct CbEnv **out);

/**
 * Noisy patterning at a difficulty preset: 0 easy, 1 medium, 2 hard.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum CbStatus cb_env_new_noisy_patterning(uint32_t difficulty, uint64_t seed, struct CbEnv **out);

/**
 * Trace patterning (medium preset) with ISI on `[isi_low, isi_high]`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum CbStatus cb_env_new_trace_patterning(uint32_t isi_low,
                                          uint32_t isi_high,
                                          uint64_t seed,
                                          struct CbEnv **out);

/**
 * Number of channels per observation (CSs, US, distractors). 0 for null.
 *
 * # Safety
 * `env` must be null or a live handle.
 */
size_t cb_env_channels(const struct CbEnv *env);

/**
 * Index of the US within an observation.
 *
 * # Safety
 * `env` must be null or a live handle.
 */
size_t cb_env_us_index(const struct CbEnv *env);

/**
 * Discount `1 - 1/E[ISI]`; NaN for null.
 *
 * # Safety
 * `env` must be null or a live handle.
 */
double cb_env_discount(const struct CbEnv *env);

/**
 * Advances one step, writing `cb_env_channels` bytes (0 or 1) into `out`
 * in the order CSs, US, distractors. `trial_began` may be null.
 *
 * # Safety
 * `env` must be a live handle, `out` valid for `len` bytes, and
 * `trial_began` null or valid for writes.
 */
enum CbStatus cb_env_step(struct CbEnv *env, uint8_t *out, size_t len, bool *trial_began);

/**
 * Releases an environment. Null is ignored.
 *
 * # Safety
 * `env` must be null or a handle not yet freed.
 */
void cb_env_free(struct CbEnv *env);

/**
 * Discounted returns of a US stream into `out_returns` (length `n`);
 * `out_scored` (may be null) receives how many leading entries are scored.
 *
 * # Safety
 * `us` valid for `n` reads, `out_returns` for `n` writes.
 */
enum CbStatus cb_compute_returns(const uint8_t *us,
                                 size_t n,
                                 double gamma,
                                 double tail_epsilon,
                                 double *out_returns,
                                 size_t *out_scored);

/**
 * Mean squared return error of `predictions` against the return of `us`.
 *
 * # Safety
 * `predictions` and `us` valid for `n` reads; `out` valid for writes.
 */
enum CbStatus cb_msre(const double *predictions,
                      const uint8_t *us,
                      size_t n,
                      double gamma,
                      double tail_epsilon,
                      double *out);

/**
 * Parses an experiment config (the same text the CLI reads).
 *
 * # Safety
 * `config_text` must be a NUL-terminated string; `out` valid for writes.
 */
enum CbStatus cb_experiment_new(const char *config_text, struct CbExperiment **out);

/**
 * Multiplies steps and run counts before running.
 *
 * # Safety
 * `exp` must be a live handle.
 */
enum CbStatus cb_experiment_scale(struct CbExperiment *exp, double factor);

/**
 * Runs every configured run on `threads` workers (0 means all cores).
 *
 * # Safety
 * `exp` must be a live handle.
 */
enum CbStatus cb_experiment_run(struct CbExperiment *exp, size_t threads);

/**
 * Number of finished runs (0 before `cb_experiment_run`).
 *
 * # Safety
 * `exp` must be null or a live handle.
 */
size_t cb_experiment_n_results(const struct CbExperiment *exp);

/**
 * MSRE and derived seed of result `index`. Either output may be null.
 *
 * # Safety
 * `exp` must be a live handle; outputs null or valid for writes.
 */
enum CbStatus cb_experiment_result(const struct CbExperiment *exp,
                                   size_t index,
                                   double *out_msre,
                                   uint64_t *out_seed);

/**
 * Copies the 16-character config digest plus NUL into `buf`.
 *
 * # Safety
 * `exp` must be a live handle and `buf` valid for `len` bytes.
 */
enum CbStatus cb_experiment_digest(const struct CbExperiment *exp, char *buf, size_t len);

/**
 * Writes `config.cfg`, `runs.csv` and `curves.csv` into `dir`.
 *
 * # Safety
 * `exp` must be a live handle and `dir` a NUL-terminated string.
 */
enum CbStatus cb_experiment_write(const struct CbExperiment *exp, const char *dir);

/**
 * Releases an experiment. Null is ignored.
 *
 * # Safety
 * `exp` must be null or a handle not yet freed.
 */
void cb_experiment_free(struct CbExperiment *exp);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CONDBENCH_H */
