/* C interface to the semcom simulator and trainers.
 *
 * Every function returns a semcom_status; on failure a description of the
 * last error on the calling thread is available from semcom_last_error().
 * Handles are opaque and owned by the caller until passed to the matching
 * *_free function.
 */
#ifndef SEMCOM_SEMCOM_H
#define SEMCOM_SEMCOM_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  define SEMCOM_API __declspec(dllexport)
#else
#  define SEMCOM_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum semcom_status {
  SEMCOM_OK = 0,
  SEMCOM_ERR_INVALID_ARGUMENT = 1, /* null handle, bad buffer size, unknown name */
  SEMCOM_ERR_PARSE = 2,            /* malformed config or checkpoint */
  SEMCOM_ERR_VALIDATION = 3,       /* config invariant violated */
  SEMCOM_ERR_DOMAIN = 4,
  SEMCOM_ERR_CONSTRAINT = 5,       /* masked action or infeasible assignment */
  SEMCOM_ERR_DIVERGENCE = 6,       /* non-finite objective during training */
  SEMCOM_ERR_CAP_EXCEEDED = 7,
  SEMCOM_ERR_IO = 8,
  SEMCOM_ERR_INTERNAL = 9
} semcom_status;

typedef struct semcom_config semcom_config;
typedef struct semcom_env semcom_env;
typedef struct semcom_policy semcom_policy;

SEMCOM_API const char* semcom_version(void);
SEMCOM_API const char* semcom_last_error(void);
SEMCOM_API const char* semcom_status_name(semcom_status status);

/* Configuration ---------------------------------------------------------- */

SEMCOM_API semcom_status semcom_config_default(semcom_config** out);
SEMCOM_API semcom_status semcom_config_load(const char* path, semcom_config** out);
SEMCOM_API semcom_status semcom_config_parse(const char* text, semcom_config** out);
/* Same key syntax as the config file, e.g. ("experiment.seeds", "1,2,3"). */
SEMCOM_API semcom_status semcom_config_set(semcom_config* cfg, const char* key, const char* value);
SEMCOM_API semcom_status semcom_config_save(const semcom_config* cfg, const char* path);
/* Writes the serialized config into buf (NUL-terminated). *needed receives the
 * required size including the terminator even when buf is too small. */
SEMCOM_API semcom_status semcom_config_serialize(const semcom_config* cfg, char* buf, size_t cap, size_t* needed);
SEMCOM_API void semcom_config_free(semcom_config* cfg);

/* Experiments ------------------------------------------------------------ */

/* Trains/evaluates experiment.algorithm for every seed and writes curves and
 * summary.json into experiment.out_dir. */
SEMCOM_API semcom_status semcom_run(const semcom_config* cfg);
/* Accuracy-vs-SINR sweep for every encoder, one CSV per seed. */
SEMCOM_API semcom_status semcom_profile(const semcom_config* cfg);
/* Exhaustive search on the first seed's channel; writes oracle_seed<N>.json. */
SEMCOM_API semcom_status semcom_oracle(const semcom_config* cfg, double* best_value);
SEMCOM_API semcom_status semcom_compare(const char* const* run_dirs, size_t count, const char* out_dir);

/* Environment ------------------------------------------------------------ */

SEMCOM_API semcom_status semcom_env_create(const semcom_config* cfg, uint64_t seed, semcom_env** out);
SEMCOM_API void semcom_env_free(semcom_env* env);
SEMCOM_API size_t semcom_env_state_dim(const semcom_env* env);
SEMCOM_API size_t semcom_env_action_count(const semcom_env* env);
/* Starts an episode; writes the encoded state (state_dim doubles). */
SEMCOM_API semcom_status semcom_env_reset(semcom_env* env, double* state, size_t state_cap);
/* 1 = allowed, 0 = masked (action_count bytes). */
SEMCOM_API semcom_status semcom_env_mask(const semcom_env* env, uint8_t* mask, size_t mask_cap);
SEMCOM_API semcom_status semcom_env_step(semcom_env* env, int32_t action, double* state, size_t state_cap,
                                         double* reward, int* terminal);

/* Policies --------------------------------------------------------------- */

SEMCOM_API semcom_status semcom_policy_load(const char* path, semcom_policy** out);
SEMCOM_API semcom_status semcom_policy_save(const semcom_policy* policy, const char* path);
SEMCOM_API void semcom_policy_free(semcom_policy* policy);
/* Greedy (most probable) unmasked action. */
SEMCOM_API semcom_status semcom_policy_act(const semcom_policy* policy, const double* state, size_t state_dim,
                                           const uint8_t* mask, size_t action_count, int32_t* action);

#ifdef __cplusplus
}
#endif

#endif /* SEMCOM_SEMCOM_H */
