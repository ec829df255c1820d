/* C interface for the jrpd joint-replenishment laboratory. */

#ifndef JRPD_H
#define JRPD_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status code returned by every fallible entry point.
 */
typedef enum JrpdStatus {
  JRPD_STATUS_OK = 0,
  JRPD_STATUS_NULL_ARGUMENT = 1,
  JRPD_STATUS_INVALID_UTF8 = 2,
  JRPD_STATUS_PARSE_ERROR = 3,
  JRPD_STATUS_INVALID_INSTANCE = 4,
  JRPD_STATUS_UNKNOWN_ALGORITHM = 5,
  JRPD_STATUS_PROTOCOL_VIOLATION = 6,
  JRPD_STATUS_ORACLE_LIMIT_EXCEEDED = 7,
  JRPD_STATUS_INFEASIBLE = 8,
  JRPD_STATUS_INVALID_ARGUMENT = 9,
} JrpdStatus;

/**
 * Prediction noise selector for `jrpd_gen_random`.
 */
typedef enum JrpdNoise {
  /**
   * Predictions equal deadlines; `noise_param` ignored.
   */
  JRPD_NOISE_EXACT = 0,
  /**
   * Uniform offset in `[-noise_param, noise_param]`, clamped to arrivals.
   */
  JRPD_NOISE_SHIFT = 1,
  /**
   * Random prediction swaps toward `noise_param` raw request inversions.
   */
  JRPD_NOISE_TARGET_INVERSIONS = 2,
} JrpdNoise;

/**
 * Adversary outcome selector.
 */
typedef enum JrpdAdversaryCase {
  JRPD_ADVERSARY_CASE_NO_INVERSIONS = 1,
  JRPD_ADVERSARY_CASE_MANY_INVERSIONS = 2,
} JrpdAdversaryCase;

/**
 * Opaque instance handle.
 */
typedef struct JrpdInstance JrpdInstance;

/**
 * Opaque schedule handle.
 */
typedef struct JrpdSchedule JrpdSchedule;

/**
 * Prediction-error counters of one instance.
 */
typedef struct JrpdMetrics {
  uint64_t request_inversions;
  uint64_t request_inversions_floored;
  uint64_t item_inversions;
  uint64_t instantaneous_item_inversions;
  /**
   * Earliest tick attaining the instantaneous maximum.
   */
  int64_t peak_time;
  /**
   * Instantaneous item inversions floored at 1.
   */
  uint64_t eta;
} JrpdMetrics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the most recent error on this thread, or NULL. The
 * caller owns the returned string (release with `jrpd_string_free`).
 */
char *jrpd_last_error_message(void);

/**
 * Releases a string returned by this library. NULL is ignored.
 *
 * # Safety
 * `s` must have been returned by a jrpd function and not freed before.
 */
void jrpd_string_free(char *s);

/**
 * Parses an instance from its JSON representation and validates it.
 *
 * # Safety
 * `json` must be a valid NUL-terminated string; `out` must be a valid
 * pointer.
 */
enum JrpdStatus jrpd_instance_from_json(const char *json, struct JrpdInstance **out);

/**
 * Serializes an instance to JSON. Returns NULL when the handle is NULL.
 *
 * # Safety
 * `instance` must be a live handle from this library.
 */
char *jrpd_instance_to_json(const struct JrpdInstance *instance);

/**
 * # Safety
 * `instance` must be a live handle or NULL; it is invalid afterwards.
 */
void jrpd_instance_free(struct JrpdInstance *instance);

/**
 * # Safety
 * `instance` must be a live handle.
 */
size_t jrpd_instance_item_count(const struct JrpdInstance *instance);

/**
 * # Safety
 * `instance` must be a live handle.
 */
size_t jrpd_instance_request_count(const struct JrpdInstance *instance);

/**
 * Red/black adversarial family (2k items, k + k^2 requests).
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum JrpdStatus jrpd_gen_red_black(uint32_t k, struct JrpdInstance **out);

/**
 * Cheap/expensive tightness family (2n items, 2n^2 requests).
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum JrpdStatus jrpd_gen_cheap_expensive(uint32_t n, struct JrpdInstance **out);

/**
 * Seeded random instance. `noise_param` is the shift bound or the inversion
 * budget depending on `noise`; `noise_seed` seeds the swap stream for
 * `TargetInversions`.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum JrpdStatus jrpd_gen_random(uint32_t items,
                                uint32_t requests,
                                int64_t horizon,
                                uint32_t weight_grid,
                                enum JrpdNoise noise,
                                int64_t noise_param,
                                uint64_t noise_seed,
                                uint64_t seed,
                                struct JrpdInstance **out);

/**
 * Behavior-adaptive lower-bound instance against a registered algorithm.
 * `n` must be a perfect square and `c_numer/c_denom >= 1`. On success the
 * chosen case and the per-phase service count are written through the
 * optional out-pointers.
 *
 * # Safety
 * `algorithm` must be a valid NUL-terminated string; `out` must be valid;
 * `out_case`/`out_services_per_phase` may be NULL.
 */
enum JrpdStatus jrpd_gen_adversary(const char *algorithm,
                                   uint32_t n,
                                   int64_t c_numer,
                                   int64_t c_denom,
                                   struct JrpdInstance **out,
                                   enum JrpdAdversaryCase *out_case,
                                   uint32_t *out_services_per_phase);

/**
 * Runs a registered algorithm on an instance. Writes the schedule handle
 * through `out_schedule` and, unless NULL, the exact total cost as a
 * rational string through `out_cost`.
 *
 * # Safety
 * `instance` must be a live handle; `algorithm` a valid string;
 * `out_schedule` valid; `out_cost` may be NULL.
 */
enum JrpdStatus jrpd_run(const struct JrpdInstance *instance,
                         const char *algorithm,
                         bool clairvoyant,
                         struct JrpdSchedule **out_schedule,
                         char **out_cost);

/**
 * Parses a schedule from JSON.
 *
 * # Safety
 * `json` must be a valid NUL-terminated string; `out` must be valid.
 */
enum JrpdStatus jrpd_schedule_from_json(const char *json, struct JrpdSchedule **out);

/**
 * Serializes a schedule to JSON. Returns NULL when the handle is NULL.
 *
 * # Safety
 * `schedule` must be a live handle.
 */
char *jrpd_schedule_to_json(const struct JrpdSchedule *schedule);

/**
 * # Safety
 * `schedule` must be a live handle or NULL; it is invalid afterwards.
 */
void jrpd_schedule_free(struct JrpdSchedule *schedule);

/**
 * # Safety
 * `schedule` must be a live handle.
 */
size_t jrpd_schedule_service_count(const struct JrpdSchedule *schedule);

/**
 * Feasibility check of a schedule against an instance. Returns `Ok` when
 * feasible (writing the exact cost unless `out_cost` is NULL) and
 * `Infeasible` with the violation list in the last-error message otherwise.
 *
 * # Safety
 * Both handles must be live; `out_cost` may be NULL.
 */
enum JrpdStatus jrpd_verify(const struct JrpdInstance *instance,
                            const struct JrpdSchedule *schedule,
                            char **out_cost);

/**
 * Prediction-error metrics of an instance.
 *
 * # Safety
 * `instance` must be a live handle; `out` must be valid.
 */
enum JrpdStatus jrpd_metrics(const struct JrpdInstance *instance, struct JrpdMetrics *out);

/**
 * Exact offline optimum; refuses with `OracleLimitExceeded` when the
 * instance has more than `deadline_limit` distinct deadlines. Writes the
 * exact cost through `out_cost` and, unless NULL, a witness schedule handle
 * through `out_witness`.
 *
 * # Safety
 * `instance` must be a live handle; `out_cost` must be valid; `out_witness`
 * may be NULL.
 */
enum JrpdStatus jrpd_opt_exact(const struct JrpdInstance *instance,
                               uint32_t deadline_limit,
                               char **out_cost,
                               struct JrpdSchedule **out_witness);

/**
 * Certified bounds `lower <= OPT <= upper`; the upper bound is the cost of a
 * feasible witness.
 *
 * # Safety
 * `instance` must be a live handle; `out_lower` and `out_upper` must be
 * valid; `out_witness` may be NULL.
 */
enum JrpdStatus jrpd_opt_bounds(const struct JrpdInstance *instance,
                                char **out_lower,
                                char **out_upper,
                                struct JrpdSchedule **out_witness);

/**
 * Raw request-inversion pair count of an instance (unfloored), exposed for
 * bindings that only need one number without the full metrics struct.
 *
 * # Safety
 * `instance` must be a live handle.
 */
uint64_t jrpd_request_inversions(const struct JrpdInstance *instance);

/**
 * Compares two rational cost strings; returns -1, 0, 1, or
 * `i32::MIN` when either string does not parse.
 *
 * # Safety
 * Both arguments must be valid NUL-terminated strings.
 */
int32_t jrpd_cost_cmp(const char *a, const char *b);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* JRPD_H */
