/*
 * Copyright (c) 2026 The corra authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

/* C interface of libcorra: configuration, training and evaluation runs,
 * theory verification, plot-data export, and a stepping surface over the
 * radio environment. Every function returns a corra_status; on failure,
 * corra_last_error() describes the most recent error of the calling
 * thread. Handles are opaque and must be released with their _free
 * function. */

#ifndef CORRA_H
#define CORRA_H

#include <stdint.h>

#if defined(_WIN32)
#define CORRA_API __declspec(dllexport)
#else
#define CORRA_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum corra_status {
  CORRA_OK = 0,
  CORRA_ERR_RUNTIME = 1,
  CORRA_ERR_CONFIG = 2,
  CORRA_ERR_COLLAPSE = 3,
  CORRA_ERR_IO = 4,
  CORRA_ERR_BADARG = 5,
  CORRA_ERR_VERIFY_FAILED = 6
} corra_status;

CORRA_API const char* corra_version(void);

/* Thread-local message for the last failing call; never NULL. */
CORRA_API const char* corra_last_error(void);

CORRA_API void corra_string_free(char* s);

/* ------------------------------------------------------------------ */
/* configuration                                                      */
/* ------------------------------------------------------------------ */

typedef struct corra_config corra_config;

CORRA_API int corra_config_load(const char* path, corra_config** out);
CORRA_API int corra_config_parse(const char* text, corra_config** out);
CORRA_API void corra_config_free(corra_config* cfg);
CORRA_API int corra_config_hash(const corra_config* cfg, uint64_t* out);
CORRA_API int corra_config_system_hash(const corra_config* cfg, uint64_t* out);
/* Canonical resolved text; free with corra_string_free. */
CORRA_API int corra_config_canonical(const corra_config* cfg, char** out);

/* ------------------------------------------------------------------ */
/* runs                                                               */
/* ------------------------------------------------------------------ */

/* seed_override < 0 keeps the config seed; out_dir NULL keeps the config
 * output directory. */
CORRA_API int corra_train(const char* config_path, int64_t seed_override,
                          const char* out_dir);

/* duration_min <= 0 keeps the scenario's eval duration. */
CORRA_API int corra_eval(const char* checkpoint_path, const char* scenario_path,
                         double duration_min, int64_t seed_override,
                         const char* out_dir);

/* scope NULL or "" runs every suite. The report table is malloc'd; free it
 * with corra_string_free. Returns CORRA_ERR_VERIFY_FAILED when any suite
 * fails; *failures receives the failing suite count. */
CORRA_API int corra_verify(const char* scope, char** report, int* failures);

CORRA_API int corra_export_plots(const char* metrics_csv, const char* out_dir);

/* ------------------------------------------------------------------ */
/* environment surface                                                */
/* ------------------------------------------------------------------ */

typedef struct corra_env corra_env;

/* continuous != 0 selects the arrival/departure/mobility mode used by
 * evaluation; 0 selects per-episode training randomization. */
CORRA_API int corra_env_create(const corra_config* cfg, int continuous,
                               uint64_t seed, corra_env** out);
CORRA_API void corra_env_free(corra_env* env);
CORRA_API int corra_env_reset(corra_env* env, uint64_t episode);

CORRA_API int corra_env_dims(const corra_env* env, int32_t* bs_count,
                             int32_t* srb_count, int32_t* srb_size,
                             int32_t* action_classes, int32_t* obs_dim,
                             int32_t* user_slots);

/* Observation of agent (bs, srb) given the srb earlier actions of the same
 * BS this step, flattened as srb * srb_size classes. prior may be NULL when
 * srb == 0. obs_out must hold obs_dim doubles. */
CORRA_API int corra_env_observe(const corra_env* env, int32_t bs, int32_t srb,
                                const int32_t* prior, double* obs_out);

/* joint holds bs_count * srb_count * srb_size classes in (bs, srb, slot)
 * order. Any output pointer may be NULL. group_rewards needs srb_count
 * entries, costs needs user_slots entries. */
CORRA_API int corra_env_step(corra_env* env, const int32_t* joint,
                             double* reward, double* group_rewards,
                             double* costs, double* throughput);

/* Presence bits of one BS, slot 0 unused; out needs users_per_bs + 1. */
CORRA_API int corra_env_presence(const corra_env* env, int32_t bs,
                                 uint8_t* out);

/* ------------------------------------------------------------------ */
/* checkpoints                                                        */
/* ------------------------------------------------------------------ */

CORRA_API int corra_checkpoint_info(const char* path, uint32_t* version,
                                    uint64_t* config_hash,
                                    uint64_t* system_hash, uint64_t* episode);

#ifdef __cplusplus
}
#endif

#endif /* CORRA_H */
