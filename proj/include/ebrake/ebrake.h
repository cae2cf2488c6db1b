/* C interface to the ebrake library: emergency braking of a three-vehicle
 * platoon, harm-minimizing baselines, learned policies and the shield that
 * arbitrates between them.
 *
 * All functions return an eb_status. On failure, eb_last_error() returns a
 * message for the calling thread that stays valid until the next call on that
 * thread. Handles are opaque and owned by the caller; free them with the
 * matching *_free function (NULL is accepted). String outputs use caller
 * buffers: the required size including the terminator is stored in *needed,
 * and EB_ERR_INVALID_ARGUMENT is returned when the buffer is too small. */
#ifndef EBRAKE_EBRAKE_H
#define EBRAKE_EBRAKE_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  ifdef EBRAKE_BUILDING_LIBRARY
#    define EB_API __declspec(dllexport)
#  else
#    define EB_API __declspec(dllimport)
#  endif
#else
#  define EB_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum eb_status {
  EB_OK = 0,
  EB_ERR_INVALID_ARGUMENT = 1,
  EB_ERR_INVALID_CONFIG = 2,
  EB_ERR_IO = 3,
  EB_ERR_NOT_FOUND = 4,
  EB_ERR_NUMERIC = 5,
  EB_ERR_TRAINING = 6,
  EB_ERR_INTERNAL = 7
} eb_status;

typedef enum eb_config_kind {
  EB_CONFIG_SCENARIO = 0,
  EB_CONFIG_FAMILY = 1,
  EB_CONFIG_WEIGHTS = 2,
  EB_CONFIG_TRAINER = 3
} eb_config_kind;

typedef enum eb_algorithm { EB_ALGO_PPO = 0, EB_ALGO_SAC = 1 } eb_algorithm;

typedef enum eb_strategy_kind {
  EB_STRATEGY_NON_ETHICAL = 0,
  EB_STRATEGY_BASELINE = 1,
  EB_STRATEGY_DRL = 2,
  EB_STRATEGY_HYBRID = 3
} eb_strategy_kind;

typedef struct eb_config eb_config;
typedef struct eb_policy eb_policy;
typedef struct eb_strategy_set eb_strategy_set;
typedef struct eb_eval_result eb_eval_result;

EB_API const char* eb_version(void);
EB_API const char* eb_last_error(void);
EB_API const char* eb_status_string(eb_status status);

/* Configuration records. Presets: scenario "reference" (or NULL); family
 * "random", "low-delay", "high-delay", "wide-gap" (NULL = "random");
 * weights and trainer accept NULL or "default". */
EB_API eb_status eb_config_new(eb_config_kind kind, const char* preset, eb_config** out);
EB_API void eb_config_free(eb_config* config);
EB_API eb_status eb_config_kind_of(const eb_config* config, eb_config_kind* out);
/* Overlays the keys of a "key = value" file. */
EB_API eb_status eb_config_load(eb_config* config, const char* path);
EB_API eb_status eb_config_set(eb_config* config, const char* key, const char* value);
EB_API eb_status eb_config_get(const eb_config* config, const char* key, char* buf, size_t len,
                               size_t* needed);
EB_API eb_status eb_config_dump(const eb_config* config, char* buf, size_t len, size_t* needed);
/* EB_ERR_INVALID_CONFIG with every violation in eb_last_error(). */
EB_API eb_status eb_config_validate(const eb_config* config);

/* Policies. */
EB_API eb_status eb_policy_new_untrained(eb_algorithm algorithm, const eb_config* trainer,
                                         uint64_t seed, eb_policy** out);
EB_API eb_status eb_policy_load(const char* path, eb_policy** out);
EB_API eb_status eb_policy_save(const eb_policy* policy, const char* path);
EB_API void eb_policy_free(eb_policy* policy);
/* Deterministic raw action in [-1, 1] for a 9-entry observation. */
EB_API eb_status eb_policy_act(const eb_policy* policy, const double* obs, size_t n, double* action);

typedef void (*eb_progress_fn)(int64_t iteration, int64_t env_steps, double mean_return,
                               double std_return, void* user);

/* Trains on scenarios drawn from `family`. Writes the learning curve CSV when
 * curve_csv is not NULL. */
EB_API eb_status eb_train(eb_algorithm algorithm, const eb_config* family, const eb_config* weights,
                          const eb_config* trainer, uint64_t seed, const char* curve_csv,
                          eb_progress_fn progress, void* user, eb_policy** out);

typedef struct eb_baseline_result {
  double a_star;
  double h_star;
  int has_interval;
  double interval_lo;
  double interval_hi;
  size_t grid_points;
} eb_baseline_result;

/* Sweeps constant decelerations. dt <= 0 keeps the scenario's period. Writes
 * the harm-vs-deceleration CSV (decel,harm) when curve_csv is not NULL. */
EB_API eb_status eb_baseline_solve(const eb_config* scenario, double grid_step, double dt, int jobs,
                                   const char* curve_csv, eb_baseline_result* out);

/* Strategy sets. The set keeps its own reference to any policy added. */
EB_API eb_status eb_strategy_set_new(eb_strategy_set** out);
EB_API void eb_strategy_set_free(eb_strategy_set* set);
/* name may be NULL (default name of the kind); policy is required for DRL and hybrid. */
EB_API eb_status eb_strategy_set_add(eb_strategy_set* set, eb_strategy_kind kind, const char* name,
                                     const eb_policy* policy);
EB_API eb_status eb_strategy_set_size(const eb_strategy_set* set, size_t* out);
/* Baseline grid step used by baseline and hybrid strategies (default 0.01). */
EB_API eb_status eb_strategy_set_grid_step(eb_strategy_set* set, double grid_step);

typedef struct eb_strategy_summary {
  char name[64];
  int episodes;
  int failed;
  int collisions;
  double collision_rate;
  double avg_harm;
  double harm_decrease;
  int decrease_defined;
} eb_strategy_summary;

EB_API eb_status eb_evaluate(const eb_strategy_set* set, const eb_config* family, int jobs,
                             eb_eval_result** out);
EB_API void eb_eval_result_free(eb_eval_result* result);
EB_API eb_status eb_eval_result_count(const eb_eval_result* result, size_t* out);
EB_API eb_status eb_eval_result_summary(const eb_eval_result* result, size_t index,
                                        eb_strategy_summary* out);
EB_API eb_status eb_eval_result_table(const eb_eval_result* result, char* buf, size_t len,
                                      size_t* needed);
EB_API eb_status eb_eval_result_write_summary(const eb_eval_result* result, const char* path);
EB_API eb_status eb_eval_result_write_episodes(const eb_eval_result* result, const char* path);

typedef struct eb_hybrid_totals {
  int episodes;
  int drl_selected;
  double avg_executed_harm;
} eb_hybrid_totals;

/* Runs the shield on every scenario of the family and writes the decision log. */
EB_API eb_status eb_run_hybrid(const eb_policy* policy, const eb_config* family, double grid_step,
                               int jobs, const char* decision_csv, eb_hybrid_totals* out);

/* Curve exports. distances/delays may be NULL to use the default grids. */
EB_API eb_status eb_export_distance_curve(const eb_strategy_set* set, const eb_config* scenario,
                                          const double* distances, size_t count, int samples,
                                          uint64_t seed, int jobs, const char* path);
EB_API eb_status eb_export_delay_curve(const eb_strategy_set* set, const eb_config* scenario,
                                       const double* tau2, const double* tau3, size_t count, int jobs,
                                       const char* path);
/* Trajectory CSV of strategy `index` of the set. */
EB_API eb_status eb_export_trajectory(const eb_strategy_set* set, size_t index,
                                      const eb_config* scenario, const char* path);
/* Built-in trajectory scenarios: "s1", "s2". */
EB_API eb_status eb_config_trajectory_scenario(const char* name, eb_config** out);

#ifdef __cplusplus
}
#endif

#endif
