#ifndef NASHPDE_H
#define NASHPDE_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes. Zero is success.
 */
typedef enum NpStatus {
  NP_STATUS_OK = 0,
  NP_STATUS_NULL_POINTER = 1,
  NP_STATUS_INVALID_UTF8 = 2,
  NP_STATUS_PARSE = 3,
  NP_STATUS_CONFIG = 4,
  NP_STATUS_SINGULAR = 5,
  NP_STATUS_UNSUPPORTED = 6,
  NP_STATUS_SIMULATION = 7,
  NP_STATUS_IO = 8,
  NP_STATUS_OUT_OF_RANGE = 9,
  NP_STATUS_PANIC = 10,
} NpStatus;

/**
 * Sampled signals of a result, one column per player.
 */
typedef enum NpSignal {
  /**
   * Applied boundary input.
   */
  NP_SIGNAL_INPUT = 0,
  /**
   * Propagated action at the map.
   */
  NP_SIGNAL_ACTION = 1,
  NP_SIGNAL_PAYOFF = 2,
  NP_SIGNAL_GRADIENT = 3,
  NP_SIGNAL_HESSIAN = 4,
  NP_SIGNAL_CONTROL = 5,
} NpSignal;

/**
 * Opaque run result.
 */
typedef struct NpResult NpResult;

/**
 * Opaque scenario configuration.
 */
typedef struct NpScenario NpScenario;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread; empty after a success.
 * The pointer stays valid until the next call on the same thread.
 */
const char *np_last_error(void);

/**
 * # Safety
 * `s` must come from this library and not be freed already.
 */
void np_string_free(char *s);

/**
 * Number of built-in scenarios.
 */
size_t np_builtin_count(void);

/**
 * Name of built-in `index`, or null if out of range. Free with
 * [`np_string_free`].
 */
char *np_builtin_name(size_t index);

/**
 * # Safety
 * `name` is a NUL-terminated string; `out` is writable.
 */
enum NpStatus np_scenario_builtin(const char *name, struct NpScenario **out);

/**
 * Parse a JSON scenario.
 *
 * # Safety
 * `json` is a NUL-terminated string; `out` is writable.
 */
enum NpStatus np_scenario_from_json(const char *json, struct NpScenario **out);

/**
 * Resolved config as pretty JSON, or null on a null handle.
 *
 * # Safety
 * `s` is a live scenario handle.
 */
char *np_scenario_to_json(const struct NpScenario *s);

/**
 * Set a sweepable parameter (`epsilon`, `t_end` or `dt`).
 *
 * # Safety
 * `s` is a live scenario handle; `param` is a NUL-terminated string.
 */
enum NpStatus np_scenario_set(struct NpScenario *s, const char *param, double value);

/**
 * Switch the compensating laws on or off.
 *
 * # Safety
 * `s` is a live scenario handle.
 */
enum NpStatus np_scenario_set_compensation(struct NpScenario *s, bool on);

/**
 * # Safety
 * `s` is null or a live scenario handle, not used afterwards.
 */
void np_scenario_free(struct NpScenario *s);

/**
 * Simulate. A diverged run is still `Ok`; query [`np_result_divergence`].
 *
 * # Safety
 * `s` is a live scenario handle; `out` is writable.
 */
enum NpStatus np_run(const struct NpScenario *s, struct NpResult **out);

/**
 * # Safety
 * `r` is null or a live result handle, not used afterwards.
 */
void np_result_free(struct NpResult *r);

/**
 * # Safety
 * `r` is a live result handle.
 */
size_t np_result_players(const struct NpResult *r);

/**
 * # Safety
 * `r` is a live result handle.
 */
size_t np_result_samples(const struct NpResult *r);

/**
 * Copy the sample times into `buf` (at least `np_result_samples` values).
 *
 * # Safety
 * `r` is a live result handle; `buf` has room for `len` doubles.
 */
enum NpStatus np_result_times(const struct NpResult *r, double *buf, size_t len);

/**
 * Copy one sampled signal of `player` into `buf`.
 *
 * # Safety
 * `r` is a live result handle; `buf` has room for `len` doubles.
 */
enum NpStatus np_result_signal(const struct NpResult *r,
                               size_t player,
                               enum NpSignal signal,
                               double *buf,
                               size_t len);

/**
 * Target action and tail residual `sup |Theta - Theta*|` of `player`.
 *
 * # Safety
 * `r` is a live result handle; `star` and `tail` are writable.
 */
enum NpStatus np_result_tail(const struct NpResult *r, size_t player, double *star, double *tail);

/**
 * True if the divergence detector fired; the time goes to `t` when given.
 *
 * # Safety
 * `r` is a live result handle; `t` is null or writable.
 */
bool np_result_divergence(const struct NpResult *r, double *t);

/**
 * Write the CSV, manifest and report of a run into `dir`.
 *
 * # Safety
 * Both handles are live; `dir` is a NUL-terminated path.
 */
enum NpStatus np_result_export(const struct NpScenario *s,
                               const struct NpResult *r,
                               const char *dir);

/**
 * Nash equilibrium of the heterogeneous duopoly at coupling `eps`.
 *
 * # Safety
 * `out` has room for two doubles.
 */
enum NpStatus np_duopoly_nash(double eps, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NASHPDE_H */
