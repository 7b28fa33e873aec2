/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#ifndef PERIGEN_H
#define PERIGEN_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Result code of every fallible call.
 */
typedef enum PgStatus {
  PG_STATUS_OK = 0,
  PG_STATUS_NULL_ARGUMENT = 1,
  PG_STATUS_INVALID_ARGUMENT = 2,
  PG_STATUS_CONFIG = 3,
  PG_STATUS_PARSE = 4,
  PG_STATUS_IO = 5,
  PG_STATUS_NUMERIC = 6,
  PG_STATUS_PANIC = 7,
} PgStatus;

/*
 A trained predictor: a feedforward net or a population unit.
 */
typedef struct PgModel PgModel;

/*
 A generated benchmark signal together with its domain sizes.
 */
typedef struct PgVariant PgVariant;

/*
 Metric values of one evaluation; warp fields hold the chosen correction.
 */
typedef struct PgMetricRow {
  double mse;
  double da;
  double shda;
  double spda;
  double acda;
  double sh_w;
  double sp_w;
  double ac_w;
} PgMetricRow;

/*
 One finished sweep cell as seen by a [`PgRecordCallback`]. The strings are
 only valid during the callback.
 */
typedef struct PgRecord {
  size_t variant_id;
  size_t form_id;
  size_t repeat;
  const char *model;
  const char *optimizer;
  bool failed;
  double wall_time;
  struct PgMetricRow metrics;
} PgRecord;

/*
 Receives each record of [`pg_run_experiment`] in roster order.
 */
typedef void (*PgRecordCallback)(const struct PgRecord *record, void *user_data);

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Library version as a static NUL-terminated string.
 */
const char *pg_version(void);

/*
 Message of the last failed call on this thread, or null. Valid until the
 next call into the library from the same thread.
 */
const char *pg_last_error(void);

/*
 Generates a normalized variant of `skeleton` (e.g. `"(* sin square)"`),
 optionally offset by a linear trend.

 # Safety
 `skeleton` must be a NUL-terminated string and `out` a writable pointer.
 */
enum PgStatus pg_variant_generate(const char *skeleton,
                                  bool linear_trend,
                                  uint64_t seed,
                                  uint32_t train_periods,
                                  uint32_t eval_periods,
                                  struct PgVariant **out);

/*
 # Safety
 `variant` must come from this library and not be freed twice; null is a no-op.
 */
void pg_variant_free(struct PgVariant *variant);

/*
 # Safety
 `variant` must be a live handle and `out` writable.
 */
enum PgStatus pg_variant_master_period(const struct PgVariant *variant, double *out);

/*
 Noiseless signal values at `n` points.

 # Safety
 `xs` and `ys` must hold `n` elements each.
 */
enum PgStatus pg_variant_values(const struct PgVariant *variant,
                                const double *xs,
                                size_t n,
                                double *ys);

/*
 Trains a roster model (`"snake"`, `"n-fittest"`, ...) on `rate` samples
 per period of the variant's training domain with noise variance
 `noise_variance`. Feedforward models use `optimizer` (`"adam"`, ...);
 population models always use their configured unit optimizer.

 # Safety
 String arguments must be NUL-terminated, `variant` live and `out` writable.
 */
enum PgStatus pg_model_train(const struct PgVariant *variant,
                             const char *model,
                             const char *optimizer,
                             double noise_variance,
                             size_t rate,
                             uint64_t seed,
                             struct PgModel **out);

/*
 Loads a JSON checkpoint written by the `run` command or [`pg_model_save`].

 # Safety
 `path` must be NUL-terminated and `out` writable.
 */
enum PgStatus pg_model_load(const char *path, struct PgModel **out);

/*
 # Safety
 `model` must be live and `path` NUL-terminated.
 */
enum PgStatus pg_model_save(const struct PgModel *model, const char *path);

/*
 # Safety
 `xs` and `ys` must hold `n` elements each.
 */
enum PgStatus pg_model_predict(const struct PgModel *model, const double *xs, size_t n, double *ys);

/*
 # Safety
 `model` must come from this library and not be freed twice; null is a no-op.
 */
void pg_model_free(struct PgModel *model);

/*
 Scores `model` on the variant's evaluation grid with the default metric
 settings.

 # Safety
 Handles must be live and `out` writable.
 */
enum PgStatus pg_evaluate(const struct PgModel *model,
                          const struct PgVariant *variant,
                          size_t rate,
                          struct PgMetricRow *out);

/*
 Runs the sweep described by `config_toml` (null or empty for defaults),
 calls `callback` once per record in roster order and writes the markdown
 summary table to `summary` (release it with [`pg_string_free`]) when
 `summary` is not null.

 # Safety
 `config_toml` must be null or NUL-terminated; `callback` must be safe to
 call with `user_data`.
 */
enum PgStatus pg_run_experiment(const char *config_toml,
                                PgRecordCallback callback,
                                void *user_data,
                                char **summary);

/*
 # Safety
 `s` must come from this library and not be freed twice; null is a no-op.
 */
void pg_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PERIGEN_H */
