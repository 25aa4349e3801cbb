/*
 * Copyright (c) 2026 The corra authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#include "corra.h"

#include <cstdlib>
#include <cstring>
#include <sstream>
#include <string>

#include "corra/checkpoint.hpp"
#include "corra/config.hpp"
#include "corra/env.hpp"
#include "corra/errors.hpp"
#include "corra/runner.hpp"
#include "corra/verify.hpp"

namespace {

thread_local std::string g_last_error = "no error";

constexpr std::uint32_t kConfigMagic = 0x434f4e46;  // "CONF"
constexpr std::uint32_t kEnvMagic = 0x454e5649;     // "ENVI"

int set_error(int code, const std::string& message) {
  g_last_error = message;
  return code;
}

template <typename Fn>
int guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const corra::ConfigError& e) {
    return set_error(CORRA_ERR_CONFIG, e.what());
  } catch (const corra::TrainingCollapsed& e) {
    return set_error(CORRA_ERR_COLLAPSE, e.what());
  } catch (const corra::IoError& e) {
    return set_error(CORRA_ERR_IO, e.what());
  } catch (const corra::ContractError& e) {
    return set_error(CORRA_ERR_BADARG, e.what());
  } catch (const corra::DomainError& e) {
    return set_error(CORRA_ERR_BADARG, e.what());
  } catch (const std::exception& e) {
    return set_error(CORRA_ERR_RUNTIME, e.what());
  } catch (...) {
    return set_error(CORRA_ERR_RUNTIME, "unknown error");
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

}  // namespace

struct corra_config {
  std::uint32_t magic = kConfigMagic;
  corra::RunConfig config;
};

struct corra_env {
  std::uint32_t magic = kEnvMagic;
  corra::RunConfig config;
  corra::Environment env;
};

namespace {

const corra_config* checked(const corra_config* cfg) {
  if (!cfg || cfg->magic != kConfigMagic)
    throw corra::ContractError("invalid corra_config handle");
  return cfg;
}

const corra_env* checked(const corra_env* env) {
  if (!env || env->magic != kEnvMagic)
    throw corra::ContractError("invalid corra_env handle");
  return env;
}

corra_env* checked(corra_env* env) {
  if (!env || env->magic != kEnvMagic)
    throw corra::ContractError("invalid corra_env handle");
  return env;
}

}  // namespace

extern "C" {

const char* corra_version(void) { return "1.0.0"; }

const char* corra_last_error(void) { return g_last_error.c_str(); }

void corra_string_free(char* s) { std::free(s); }

int corra_config_load(const char* path, corra_config** out) {
  return guarded([&] {
    if (!path || !out) throw corra::ContractError("null argument");
    auto* handle = new corra_config{kConfigMagic, corra::RunConfig::parse_file(path)};
    *out = handle;
    return CORRA_OK;
  });
}

int corra_config_parse(const char* text, corra_config** out) {
  return guarded([&] {
    if (!text || !out) throw corra::ContractError("null argument");
    auto* handle =
        new corra_config{kConfigMagic, corra::RunConfig::parse_string(text)};
    *out = handle;
    return CORRA_OK;
  });
}

void corra_config_free(corra_config* cfg) {
  if (cfg && cfg->magic == kConfigMagic) {
    cfg->magic = 0;
    delete cfg;
  }
}

int corra_config_hash(const corra_config* cfg, uint64_t* out) {
  return guarded([&] {
    if (!out) throw corra::ContractError("null argument");
    *out = checked(cfg)->config.config_hash();
    return CORRA_OK;
  });
}

int corra_config_system_hash(const corra_config* cfg, uint64_t* out) {
  return guarded([&] {
    if (!out) throw corra::ContractError("null argument");
    *out = checked(cfg)->config.system_hash();
    return CORRA_OK;
  });
}

int corra_config_canonical(const corra_config* cfg, char** out) {
  return guarded([&] {
    if (!out) throw corra::ContractError("null argument");
    *out = dup_string(checked(cfg)->config.canonical_text());
    return CORRA_OK;
  });
}

int corra_train(const char* config_path, int64_t seed_override,
                const char* out_dir) {
  return guarded([&] {
    if (!config_path) throw corra::ContractError("null config path");
    corra::RunConfig config = corra::RunConfig::parse_file(config_path);
    std::optional<std::uint64_t> seed;
    if (seed_override >= 0) seed = static_cast<std::uint64_t>(seed_override);
    std::optional<std::string> out;
    if (out_dir) out = std::string(out_dir);
    corra::run_train(std::move(config), seed, out);
    return CORRA_OK;
  });
}

int corra_eval(const char* checkpoint_path, const char* scenario_path,
               double duration_min, int64_t seed_override, const char* out_dir) {
  return guarded([&] {
    if (!checkpoint_path || !scenario_path)
      throw corra::ContractError("null path argument");
    corra::RunConfig scenario = corra::RunConfig::parse_file(scenario_path);
    std::optional<double> duration;
    if (duration_min > 0.0) duration = duration_min;
    std::optional<std::uint64_t> seed;
    if (seed_override >= 0) seed = static_cast<std::uint64_t>(seed_override);
    std::optional<std::string> out;
    if (out_dir) out = std::string(out_dir);
    corra::run_eval(checkpoint_path, std::move(scenario), duration, seed, out);
    return CORRA_OK;
  });
}

int corra_verify(const char* scope, char** report, int* failures) {
  return guarded([&]() -> int {
    const std::vector<corra::SuiteResult> results =
        corra::run_verification(scope ? scope : "");
    int failed = 0;
    std::ostringstream table;
    table << "suite           status  detail\n";
    for (const corra::SuiteResult& r : results) {
      table << r.name;
      for (std::size_t i = r.name.size(); i < 16; ++i) table << ' ';
      table << (r.passed ? "PASS    " : "FAIL    ") << r.detail << "\n";
      if (!r.passed) ++failed;
    }
    if (report) *report = dup_string(table.str());
    if (failures) *failures = failed;
    if (failed > 0)
      return set_error(CORRA_ERR_VERIFY_FAILED,
                       std::to_string(failed) + " verification suite(s) failed");
    return CORRA_OK;
  });
}

int corra_export_plots(const char* metrics_csv, const char* out_dir) {
  return guarded([&] {
    if (!metrics_csv || !out_dir) throw corra::ContractError("null argument");
    corra::run_export_plots(metrics_csv, out_dir);
    return CORRA_OK;
  });
}

int corra_env_create(const corra_config* cfg, int continuous, uint64_t seed,
                     corra_env** out) {
  return guarded([&] {
    if (!out) throw corra::ContractError("null argument");
    const corra::RunConfig& rc = checked(cfg)->config;
    auto* handle = new corra_env{
        kEnvMagic, rc,
        corra::Environment(rc.system, rc.dynamics,
                           continuous ? corra::Environment::Mode::kContinuous
                                      : corra::Environment::Mode::kEpisodic,
                           seed)};
    *out = handle;
    return CORRA_OK;
  });
}

void corra_env_free(corra_env* env) {
  if (env && env->magic == kEnvMagic) {
    env->magic = 0;
    delete env;
  }
}

int corra_env_reset(corra_env* env, uint64_t episode) {
  return guarded([&] {
    checked(env)->env.reset(episode);
    return CORRA_OK;
  });
}

int corra_env_dims(const corra_env* env, int32_t* bs_count, int32_t* srb_count,
                   int32_t* srb_size, int32_t* action_classes, int32_t* obs_dim,
                   int32_t* user_slots) {
  return guarded([&] {
    const corra::SystemConfig& sys = checked(env)->env.config();
    if (bs_count) *bs_count = sys.bs_count();
    if (srb_count) *srb_count = sys.srb_count;
    if (srb_size) *srb_size = sys.srb_size();
    if (action_classes) *action_classes = sys.action_classes();
    if (obs_dim) *obs_dim = corra::Environment::obs_dim(sys);
    if (user_slots) *user_slots = sys.total_user_slots();
    return CORRA_OK;
  });
}

int corra_env_observe(const corra_env* env, int32_t bs, int32_t srb,
                      const int32_t* prior, double* obs_out) {
  return guarded([&] {
    if (!obs_out) throw corra::ContractError("null observation buffer");
    if (srb > 0 && !prior)
      throw corra::ContractError("prior actions required for srb > 0");
    const corra::Environment& e = checked(env)->env;
    const int srb_size = e.config().srb_size();
    std::vector<corra::AgentAction> prior_actions(srb);
    for (int m = 0; m < srb; ++m) {
      prior_actions[m].assignment.assign(prior + m * srb_size,
                                         prior + (m + 1) * srb_size);
    }
    const corra::Observation obs = e.observe(
        bs, srb,
        std::span<const corra::AgentAction>(prior_actions.data(), prior_actions.size()));
    std::memcpy(obs_out, obs.features.data(), obs.features.size() * sizeof(double));
    return CORRA_OK;
  });
}

int corra_env_step(corra_env* env, const int32_t* joint, double* reward,
                   double* group_rewards, double* costs, double* throughput) {
  return guarded([&] {
    if (!joint) throw corra::ContractError("null joint action");
    corra::Environment& e = checked(env)->env;
    const corra::SystemConfig& sys = e.config();
    const int srb_size = sys.srb_size();
    corra::JointAction actions(
        static_cast<std::size_t>(sys.bs_count()) * sys.srb_count);
    int at = 0;
    for (std::size_t i = 0; i < actions.size(); ++i) {
      actions[i].assignment.assign(joint + at, joint + at + srb_size);
      at += srb_size;
    }
    const corra::StepOutcome out = e.step(actions);
    if (reward) *reward = out.reward;
    if (group_rewards)
      std::memcpy(group_rewards, out.group_reward.data(),
                  out.group_reward.size() * sizeof(double));
    if (costs)
      std::memcpy(costs, out.cost_bps.data(), out.cost_bps.size() * sizeof(double));
    if (throughput) *throughput = out.throughput_bps;
    return CORRA_OK;
  });
}

int corra_env_presence(const corra_env* env, int32_t bs, uint8_t* out) {
  return guarded([&] {
    if (!out) throw corra::ContractError("null presence buffer");
    const corra::Environment& e = checked(env)->env;
    if (bs < 0 || bs >= e.config().bs_count())
      throw corra::ContractError("BS index out of range");
    const std::vector<std::uint8_t> psi = e.population().presence_metadata(bs);
    std::memcpy(out, psi.data(), psi.size());
    return CORRA_OK;
  });
}

int corra_checkpoint_info(const char* path, uint32_t* version,
                          uint64_t* config_hash, uint64_t* system_hash,
                          uint64_t* episode) {
  return guarded([&] {
    if (!path) throw corra::ContractError("null path");
    const corra::Checkpoint ckpt = corra::Checkpoint::load(path);
    if (version) *version = corra::Checkpoint::kVersion;
    if (config_hash) *config_hash = ckpt.config_hash;
    if (system_hash) *system_hash = ckpt.system_hash;
    if (episode) *episode = ckpt.episode;
    return CORRA_OK;
  });
}

}  // extern "C"
