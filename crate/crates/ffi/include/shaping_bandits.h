#ifndef SHAPING_BANDITS_H
#define SHAPING_BANDITS_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SbReason {
  SB_REASON_INITIAL_PULL = 0,
  SB_REASON_FORCED_ELIMINATION = 1,
  SB_REASON_UNIFORM_COIN = 2,
  SB_REASON_UCB_ARGMAX = 3,
  SB_REASON_EPS_EXPLORE = 4,
  SB_REASON_EPS_EXPLOIT = 5,
  SB_REASON_XI_BLEND = 6,
  SB_REASON_FIXED = 7,
} SbReason;

typedef enum SbStatus {
  SB_STATUS_OK = 0,
  SB_STATUS_NULL_POINTER = 1,
  SB_STATUS_INVALID_ARGUMENT = 2,
  SB_STATUS_RUN_COMPLETE = 3,
  SB_STATUS_ELIMINATED_ARM = 4,
  SB_STATUS_CONFIG = 5,
  SB_STATUS_IO = 6,
  SB_STATUS_NUMERIC = 7,
  SB_STATUS_PANIC = 8,
} SbStatus;

/**
 * A fitted forecaster network.
 */
typedef struct SbModel SbModel;

/**
 * One seed of a shaping-bandit run.
 */
typedef struct SbSession SbSession;

/**
 * Arm for the next episode. `arm` is 0 for Q and 1 for the expert. When
 * `blend` is set the learner should act on `Q + xi * Φ` and report the
 * return against `arm`.
 */
typedef struct SbDecision {
  uint32_t arm;
  enum SbReason reason;
  bool blend;
  double xi;
} SbDecision;

typedef struct SbSessionInfo {
  uint32_t horizon;
  uint32_t episodes_done;
  uint32_t pulls_q;
  uint32_t pulls_phi;
  bool phi_eliminated;
} SbSessionInfo;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer
 * stays valid until the next call into this library on the same thread.
 */
const char *sb_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *sb_version(void);

/**
 * Creates a session for `policy` (e.g. `"rpies"`, `"upies"`) with default
 * policy and forecaster parameters.
 *
 * # Safety
 * `policy` must be a NUL-terminated string and `out` a valid pointer.
 */
enum SbStatus sb_session_new(const char *policy,
                             uint32_t horizon,
                             double r_min,
                             double r_max,
                             uint64_t seed,
                             struct SbSession **out);

/**
 * # Safety
 * `session` must come from [`sb_session_new`] and not be used afterwards.
 */
void sb_session_free(struct SbSession *session);

/**
 * Chooses the arm for the next episode. Returns `RunComplete` once the
 * horizon is used up.
 *
 * # Safety
 * Both pointers must be valid.
 */
enum SbStatus sb_session_select(struct SbSession *session, struct SbDecision *out);

/**
 * Reports the raw return of the episode played with `arm`. `eliminated`
 * may be null; otherwise it is set when this observation eliminated the
 * expert arm.
 *
 * # Safety
 * `session` must be valid; `eliminated` must be null or valid.
 */
enum SbStatus sb_session_observe(struct SbSession *session,
                                 uint32_t arm,
                                 double raw_return,
                                 bool *eliminated);

/**
 * # Safety
 * Both pointers must be valid.
 */
enum SbStatus sb_session_info(const struct SbSession *session, struct SbSessionInfo *out);

/**
 * Fits a forecaster to `len` rewards in `[0, 1]` observed at pulls
 * `1..=len`. `horizon` fixes the input scale; `monotone` selects the
 * non-negative-weight network.
 *
 * # Safety
 * `rewards` must point to `len` doubles and `out` must be valid.
 */
enum SbStatus sb_model_fit(const double *rewards,
                           size_t len,
                           uint32_t horizon,
                           uint64_t seed,
                           bool monotone,
                           struct SbModel **out);

/**
 * # Safety
 * `model` must come from [`sb_model_fit`] and not be used afterwards.
 */
void sb_model_free(struct SbModel *model);

/**
 * Predicted reward at a (possibly fractional) pull index.
 *
 * # Safety
 * Both pointers must be valid.
 */
enum SbStatus sb_model_predict(const struct SbModel *model, double pull_index, double *out);

/**
 * Mean prediction over pulls `n .. n + remaining - 1`, clamped to `[0, 1]`.
 *
 * # Safety
 * Both pointers must be valid.
 */
enum SbStatus sb_model_future_mean(const struct SbModel *model,
                                   uint32_t n,
                                   uint32_t remaining,
                                   double *out);

/**
 * Hoeffding confidence radius for `n` samples in `[0, 1]`.
 *
 * # Safety
 * `out` must be valid.
 */
enum SbStatus sb_hoeffding_radius(size_t n, double delta, double *out);

/**
 * Runs every seed of a config file (or bundled config name) and writes
 * `<out_dir>/<name>.csv`. A null `out_dir` uses the config's own output
 * directory. `rows` may be null.
 *
 * # Safety
 * `config` must be a NUL-terminated string; `out_dir` null or one;
 * `rows` null or valid.
 */
enum SbStatus sb_run_experiment(const char *config,
                                const char *out_dir,
                                uint64_t seed_offset,
                                size_t *rows);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SHAPING_BANDITS_H */
