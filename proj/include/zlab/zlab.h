/* zlab: bracelet/terminal interaction matching, its attacks and evaluation.
 *
 * Every function returns a zlab_status. On failure, zlab_last_error() holds a
 * one-line detail message for the calling thread until its next failing call.
 * Strings returned through char** out-parameters are owned by the caller and
 * released with zlab_string_free. Handles are released with their _free
 * function; passing NULL to any _free function is a no-op.
 */
#ifndef ZLAB_ZLAB_H
#define ZLAB_ZLAB_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(ZLAB_BUILDING)
#define ZLAB_API __declspec(dllexport)
#else
#define ZLAB_API __declspec(dllimport)
#endif
#else
#define ZLAB_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum zlab_status {
  ZLAB_OK = 0,
  ZLAB_ERR_INVALID_ARGUMENT,
  ZLAB_ERR_MALFORMED_LINE,
  ZLAB_ERR_NON_MONOTONIC_TIMESTAMP,
  ZLAB_ERR_EMPTY_TRACE,
  ZLAB_ERR_INVALID_TRACE,
  ZLAB_ERR_INSUFFICIENT_CLASSES,
  ZLAB_ERR_LENGTH_MISMATCH,
  ZLAB_ERR_EMPTY_SEQUENCE,
  ZLAB_ERR_EMPTY_INPUT,
  ZLAB_ERR_TOO_FEW_PAIRS,
  ZLAB_ERR_SAME_USER,
  ZLAB_ERR_CONFIG,
  ZLAB_ERR_IO,
  ZLAB_ERR_MISSING_ARTIFACT,
  ZLAB_ERR_INTERNAL
} zlab_status;

/* Kebab-case name, e.g. "missing-artifact". */
ZLAB_API const char* zlab_status_name(zlab_status status);
/* Process exit code: 0 ok, 2 configuration/input, 3 I/O or artifact, 4 internal. */
ZLAB_API int zlab_status_exit_code(zlab_status status);
ZLAB_API const char* zlab_last_error(void);
ZLAB_API void zlab_string_free(char* s);
ZLAB_API const char* zlab_version(void);

typedef struct zlab_trace zlab_trace;
typedef struct zlab_events zlab_events;
typedef struct zlab_sequence zlab_sequence;
typedef struct zlab_bundle zlab_bundle;
typedef struct zlab_model zlab_model;
typedef struct zlab_verdict zlab_verdict;
typedef struct zlab_attacker zlab_attacker;
typedef struct zlab_config zlab_config;

/* ---- traces and event logs ---- */
ZLAB_API zlab_status zlab_trace_load(const char* path, zlab_trace** out);
ZLAB_API zlab_status zlab_trace_save(const zlab_trace* trace, const char* path);
ZLAB_API zlab_status zlab_trace_downsample(const zlab_trace* trace, size_t keep_every, zlab_trace** out);
ZLAB_API zlab_status zlab_trace_info(const zlab_trace* trace, size_t* n_samples, double* rate_hz);
ZLAB_API void zlab_trace_free(zlab_trace* trace);

ZLAB_API zlab_status zlab_events_load(const char* path, zlab_events** out);
ZLAB_API zlab_status zlab_events_save(const zlab_events* events, const char* path);
ZLAB_API void zlab_events_free(zlab_events* events);

ZLAB_API zlab_status zlab_min_required_rate(int s_min, double d_min_ms, double* out_hz);

/* ---- interaction sequences ---- */
ZLAB_API zlab_status zlab_sequence_extract(const zlab_events* events, const zlab_config* cfg, zlab_sequence** out);
ZLAB_API zlab_status zlab_sequence_load(const char* path, zlab_sequence** out);
ZLAB_API zlab_status zlab_sequence_save(const zlab_sequence* seq, const char* path);
ZLAB_API zlab_status zlab_sequence_to_text(const zlab_sequence* seq, char** out);
ZLAB_API size_t zlab_sequence_size(const zlab_sequence* seq);
ZLAB_API void zlab_sequence_free(zlab_sequence* seq);

/* ---- configuration ----
 * Key/value settings shared by every command. Later assignments replace
 * earlier ones, so loading a manifest and then setting keys gives the
 * "flags override the file" behaviour. */
ZLAB_API zlab_status zlab_config_new(zlab_config** out);
ZLAB_API zlab_status zlab_config_load(zlab_config* cfg, const char* path);
ZLAB_API zlab_status zlab_config_set(zlab_config* cfg, const char* key, const char* value);
ZLAB_API zlab_status zlab_config_get_int(const zlab_config* cfg, const char* key, int64_t* out);
ZLAB_API zlab_status zlab_config_get_string(const zlab_config* cfg, const char* key, char** out);
ZLAB_API void zlab_config_free(zlab_config* cfg);

/* ---- session bundles ---- */
ZLAB_API zlab_status zlab_bundle_generate(const char* user_id, int64_t duration_ms, uint64_t seed, zlab_bundle** out);
ZLAB_API zlab_status zlab_bundle_load(const char* dir, zlab_bundle** out);
ZLAB_API zlab_status zlab_bundle_save(const zlab_bundle* bundle, const char* dir);
ZLAB_API zlab_status zlab_bundle_trace(const zlab_bundle* bundle, zlab_trace** out);
ZLAB_API zlab_status zlab_bundle_events(const zlab_bundle* bundle, zlab_events** out);
ZLAB_API void zlab_bundle_free(zlab_bundle* bundle);

/* Writes users/duration_s/seed from cfg as <out>/userNN bundle directories. */
ZLAB_API zlab_status zlab_generate_users(const zlab_config* cfg, const char* out_dir, size_t* n_written);

/* ---- classifier ---- */
/* Trains on the truth intervals of the given bundles. With five_class set the
 * vote post-classifier is trained as well. Seed and tree count come from cfg. */
ZLAB_API zlab_status zlab_model_train(const char* const* bundle_dirs, size_t n_dirs, const zlab_config* cfg,
                                      int five_class, zlab_model** out);
ZLAB_API zlab_status zlab_model_load(const char* path, zlab_model** out);
ZLAB_API zlab_status zlab_model_save(const zlab_model* model, const char* path);
ZLAB_API int zlab_model_has_vote_tree(const zlab_model* model);
ZLAB_API void zlab_model_free(zlab_model* model);

/* Predicted sequence for the given actual sequence: one line per interaction,
 * "start end PREDICTED t s k" with the three forest vote counts. */
ZLAB_API zlab_status zlab_classify(const zlab_model* model, const zlab_trace* trace, const zlab_sequence* actual,
                                   int five_class, char** out);

/* ---- authenticator ---- */
typedef struct zlab_auth_options {
  int w;
  double m;
  int g;
  double f;
  int strict_threshold;
  int continuous_mode;
  int five_class;
} zlab_auth_options;

ZLAB_API void zlab_auth_options_default(zlab_auth_options* opts);
ZLAB_API zlab_status zlab_config_auth_options(const zlab_config* cfg, zlab_auth_options* out);

ZLAB_API zlab_status zlab_authenticate(const zlab_model* model, const zlab_trace* trace, const zlab_events* events,
                                       const zlab_auth_options* opts, zlab_verdict** out);
/* Compares two label sequences directly; predicted must match actual in length. */
ZLAB_API zlab_status zlab_authenticate_labels(const zlab_sequence* actual, const zlab_sequence* predicted,
                                              const zlab_auth_options* opts, zlab_verdict** out);
ZLAB_API zlab_status zlab_verdict_report(const zlab_verdict* verdict, char** out);
/* deauth_window is 0 when the session was never deauthenticated. */
ZLAB_API zlab_status zlab_verdict_summary(const zlab_verdict* verdict, size_t* windows, size_t* passes,
                                          size_t* deauth_window, int64_t* deauth_time_ms);
ZLAB_API void zlab_verdict_free(zlab_verdict* verdict);

typedef enum zlab_proximity { ZLAB_PROXIMITY_IMMEDIATE = 0, ZLAB_PROXIMITY_NEAR, ZLAB_PROXIMITY_FAR } zlab_proximity;
ZLAB_API zlab_status zlab_proximity_level(double rssi_db, double reference_db, zlab_proximity* out);
ZLAB_API zlab_status zlab_escalate_threshold(double base_m, zlab_proximity level, double* out);

/* ---- attackers ---- */
/* strategy: naive_all, opp_keyboard, opp_all or audio_keyboard. */
ZLAB_API zlab_status zlab_attacker_default(const char* strategy, zlab_attacker** out);
ZLAB_API zlab_status zlab_attacker_load(const char* path, zlab_attacker** out);
ZLAB_API zlab_status zlab_attacker_set(zlab_attacker* attacker, const char* field, const char* value);
ZLAB_API zlab_status zlab_attacker_to_text(const zlab_attacker* attacker, char** out);
ZLAB_API void zlab_attacker_free(zlab_attacker* attacker);

ZLAB_API zlab_status zlab_attack_apply(const zlab_bundle* victim, const zlab_attacker* attacker, uint64_t seed,
                                       zlab_events** out);

/* ---- full experiment ---- */
/* Runs every suite described by cfg and writes reports under its "out" key.
 * report receives the text tables; pass NULL to skip. */
ZLAB_API zlab_status zlab_experiment_run(const zlab_config* cfg, char** report);

#ifdef __cplusplus
}
#endif

#endif
