#include "semcom/semcom.h"

#include <cstring>
#include <exception>
#include <new>
#include <string>

#include "semcom/error.hpp"
#include "semcom/experiment.hpp"

struct semcom_config {
  semcom::Config cfg;
};

struct semcom_env {
  semcom::Environment env;
  semcom::EpisodeStreams streams;
  semcom::EpisodeState state;
  bool started = false;
  bool done = false;
};

struct semcom_policy {
  semcom::nn::Network net;
};

namespace {

thread_local std::string last_error;

semcom_status status_of(semcom::ErrorKind kind) {
  using semcom::ErrorKind;
  switch (kind) {
    case ErrorKind::Domain: return SEMCOM_ERR_DOMAIN;
    case ErrorKind::Shape: return SEMCOM_ERR_INVALID_ARGUMENT;
    case ErrorKind::Validation: return SEMCOM_ERR_VALIDATION;
    case ErrorKind::Parse: return SEMCOM_ERR_PARSE;
    case ErrorKind::Constraint: return SEMCOM_ERR_CONSTRAINT;
    case ErrorKind::Divergence: return SEMCOM_ERR_DIVERGENCE;
    case ErrorKind::CapExceeded: return SEMCOM_ERR_CAP_EXCEEDED;
    case ErrorKind::Io: return SEMCOM_ERR_IO;
  }
  return SEMCOM_ERR_INTERNAL;
}

template <class F>
semcom_status guarded(F&& f) {
  try {
    f();
    last_error.clear();
    return SEMCOM_OK;
  } catch (const semcom::Error& e) {
    last_error = e.what();
    return status_of(e.kind());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
  } catch (const std::exception& e) {
    last_error = e.what();
  } catch (...) {
    last_error = "unknown exception";
  }
  return SEMCOM_ERR_INTERNAL;
}

semcom_status invalid(const char* what) {
  last_error = what;
  return SEMCOM_ERR_INVALID_ARGUMENT;
}

void copy_state(const semcom_env* e, double* state) {
  const auto x = e->env.encode_state(e->state);
  std::memcpy(state, x.data(), x.size() * sizeof(double));
}

}  // namespace

extern "C" {

const char* semcom_version(void) { return "1.0.0"; }

const char* semcom_last_error(void) { return last_error.c_str(); }

const char* semcom_status_name(semcom_status status) {
  switch (status) {
    case SEMCOM_OK: return "ok";
    case SEMCOM_ERR_INVALID_ARGUMENT: return "invalid argument";
    case SEMCOM_ERR_PARSE: return "parse error";
    case SEMCOM_ERR_VALIDATION: return "validation error";
    case SEMCOM_ERR_DOMAIN: return "domain error";
    case SEMCOM_ERR_CONSTRAINT: return "constraint violation";
    case SEMCOM_ERR_DIVERGENCE: return "training divergence";
    case SEMCOM_ERR_CAP_EXCEEDED: return "enumeration cap exceeded";
    case SEMCOM_ERR_IO: return "I/O error";
    case SEMCOM_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

semcom_status semcom_config_default(semcom_config** out) {
  if (!out) return invalid("out is null");
  return guarded([&] { *out = new semcom_config{}; });
}

semcom_status semcom_config_load(const char* path, semcom_config** out) {
  if (!path || !out) return invalid("path and out must be non-null");
  return guarded([&] { *out = new semcom_config{semcom::load_config(path)}; });
}

semcom_status semcom_config_parse(const char* text, semcom_config** out) {
  if (!text || !out) return invalid("text and out must be non-null");
  return guarded([&] { *out = new semcom_config{semcom::parse_config(text)}; });
}

semcom_status semcom_config_set(semcom_config* cfg, const char* key, const char* value) {
  if (!cfg || !key || !value) return invalid("cfg, key and value must be non-null");
  return guarded([&] { semcom::set_config_value(cfg->cfg, key, value); });
}

semcom_status semcom_config_save(const semcom_config* cfg, const char* path) {
  if (!cfg || !path) return invalid("cfg and path must be non-null");
  return guarded([&] {
    const auto text = semcom::serialize_config(cfg->cfg);
    std::FILE* f = std::fopen(path, "wb");
    semcom::require(f != nullptr, semcom::ErrorKind::Io, std::string("cannot open '") + path + "' for writing");
    const bool ok = std::fwrite(text.data(), 1, text.size(), f) == text.size();
    semcom::require(std::fclose(f) == 0 && ok, semcom::ErrorKind::Io, std::string("failed writing '") + path + "'");
  });
}

semcom_status semcom_config_serialize(const semcom_config* cfg, char* buf, size_t cap, size_t* needed) {
  if (!cfg) return invalid("cfg is null");
  std::string text;
  const auto st = guarded([&] { text = semcom::serialize_config(cfg->cfg); });
  if (st != SEMCOM_OK) return st;
  if (needed) *needed = text.size() + 1;
  if (!buf || cap < text.size() + 1) return invalid("buffer too small");
  std::memcpy(buf, text.c_str(), text.size() + 1);
  return SEMCOM_OK;
}

void semcom_config_free(semcom_config* cfg) { delete cfg; }

semcom_status semcom_run(const semcom_config* cfg) {
  if (!cfg) return invalid("cfg is null");
  return guarded([&] { semcom::run_experiment(cfg->cfg); });
}

semcom_status semcom_profile(const semcom_config* cfg) {
  if (!cfg) return invalid("cfg is null");
  return guarded([&] {
    semcom::validate(cfg->cfg);
    const std::filesystem::path out = cfg->cfg.experiment.out_dir;
    std::filesystem::create_directories(out);
    for (auto seed : cfg->cfg.experiment.seeds)
      semcom::write_profile_csv(semcom::run_profile(cfg->cfg.scenario, cfg->cfg.experiment, seed),
                                out / ("profile_seed" + std::to_string(seed) + ".csv"));
  });
}

semcom_status semcom_oracle(const semcom_config* cfg, double* best_value) {
  if (!cfg) return invalid("cfg is null");
  return guarded([&] {
    semcom::validate(cfg->cfg);
    const auto seed = cfg->cfg.experiment.seeds.front();
    const auto r = semcom::run_oracle(cfg->cfg, seed);
    const std::filesystem::path out = cfg->cfg.experiment.out_dir;
    std::filesystem::create_directories(out);
    semcom::write_oracle_json(r, seed, out / ("oracle_seed" + std::to_string(seed) + ".json"));
    if (best_value) *best_value = r.value.mean;
  });
}

semcom_status semcom_compare(const char* const* run_dirs, size_t count, const char* out_dir) {
  if (!run_dirs || !out_dir) return invalid("run_dirs and out_dir must be non-null");
  std::vector<std::filesystem::path> dirs;
  for (size_t i = 0; i < count; ++i) {
    if (!run_dirs[i]) return invalid("run directory entry is null");
    dirs.emplace_back(run_dirs[i]);
  }
  return guarded([&] { semcom::compare_runs(dirs, out_dir); });
}

semcom_status semcom_env_create(const semcom_config* cfg, uint64_t seed, semcom_env** out) {
  if (!cfg || !out) return invalid("cfg and out must be non-null");
  return guarded([&] {
    *out = new semcom_env{semcom::Environment(cfg->cfg.scenario), semcom::EpisodeStreams::from_seed(seed), {}};
  });
}

void semcom_env_free(semcom_env* env) { delete env; }

size_t semcom_env_state_dim(const semcom_env* env) {
  return env ? static_cast<size_t>(env->env.state_dim()) : 0;
}

size_t semcom_env_action_count(const semcom_env* env) {
  return env ? static_cast<size_t>(env->env.action_count()) : 0;
}

semcom_status semcom_env_reset(semcom_env* env, double* state, size_t state_cap) {
  if (!env || !state) return invalid("env and state must be non-null");
  if (state_cap < semcom_env_state_dim(env)) return invalid("state buffer smaller than state_dim");
  return guarded([&] {
    env->state = env->env.reset(env->streams.channel);
    env->started = true;
    env->done = false;
    copy_state(env, state);
  });
}

semcom_status semcom_env_mask(const semcom_env* env, uint8_t* mask, size_t mask_cap) {
  if (!env || !mask) return invalid("env and mask must be non-null");
  if (!env->started) return invalid("call semcom_env_reset first");
  if (mask_cap < semcom_env_action_count(env)) return invalid("mask buffer smaller than action_count");
  return guarded([&] {
    const auto m = env->env.action_mask(env->state);
    std::memcpy(mask, m.data(), m.size());
  });
}

semcom_status semcom_env_step(semcom_env* env, int32_t action, double* state, size_t state_cap, double* reward,
                              int* terminal) {
  if (!env || !state || !reward || !terminal) return invalid("env, state, reward and terminal must be non-null");
  if (!env->started || env->done) return invalid("episode not running; call semcom_env_reset");
  if (state_cap < semcom_env_state_dim(env)) return invalid("state buffer smaller than state_dim");
  return guarded([&] {
    auto out = env->env.step(env->state, action, env->streams.semantic);
    env->state = std::move(out.next);
    env->done = out.terminal;
    *reward = out.reward;
    *terminal = out.terminal ? 1 : 0;
    copy_state(env, state);
  });
}

semcom_status semcom_policy_load(const char* path, semcom_policy** out) {
  if (!path || !out) return invalid("path and out must be non-null");
  return guarded([&] { *out = new semcom_policy{semcom::nn::load_checkpoint(path)}; });
}

semcom_status semcom_policy_save(const semcom_policy* policy, const char* path) {
  if (!policy || !path) return invalid("policy and path must be non-null");
  return guarded([&] { semcom::nn::save_checkpoint(policy->net, path); });
}

void semcom_policy_free(semcom_policy* policy) { delete policy; }

semcom_status semcom_policy_act(const semcom_policy* policy, const double* state, size_t state_dim,
                                const uint8_t* mask, size_t action_count, int32_t* action) {
  if (!policy || !state || !mask || !action) return invalid("policy, state, mask and action must be non-null");
  if (state_dim != static_cast<size_t>(policy->net.inputs())) return invalid("state_dim does not match the policy");
  if (action_count != static_cast<size_t>(policy->net.outputs()))
    return invalid("action_count does not match the policy");
  return guarded([&] {
    *action = semcom::nn::forward(policy->net, {state, state_dim}, {mask, action_count}).argmax();
  });
}

}  // extern "C"
