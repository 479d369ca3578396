#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "semcom/semcom.h"

namespace fs = std::filesystem;

TEST_CASE("status names and version") {
  CHECK(std::string(semcom_version()) == "1.0.0");
  CHECK(std::string(semcom_status_name(SEMCOM_OK)) == "ok");
  CHECK(std::string(semcom_status_name(SEMCOM_ERR_CAP_EXCEEDED)) == "enumeration cap exceeded");
}

TEST_CASE("null arguments are rejected") {
  CHECK(semcom_config_default(nullptr) == SEMCOM_ERR_INVALID_ARGUMENT);
  CHECK(semcom_run(nullptr) == SEMCOM_ERR_INVALID_ARGUMENT);
  CHECK(std::string(semcom_last_error()).size() > 0);
  CHECK(semcom_env_state_dim(nullptr) == 0);
  semcom_config_free(nullptr);
  semcom_env_free(nullptr);
  semcom_policy_free(nullptr);
}

TEST_CASE("config parse, set and serialize") {
  semcom_config* cfg = nullptr;
  CHECK(semcom_config_parse("config.version = 1\nscenario.users = 2\nbogus = 1\n", &cfg) == SEMCOM_ERR_PARSE);
  CHECK(cfg == nullptr);
  REQUIRE(semcom_config_parse("config.version = 1\nscenario.users = 2\nscenario.rbs = 3\n", &cfg) == SEMCOM_OK);
  // Overrides are applied one at a time; invariants are checked when the config is used.
  CHECK(semcom_config_set(cfg, "ppo.epochs", "-3") == SEMCOM_OK);
  CHECK(semcom_run(cfg) == SEMCOM_ERR_VALIDATION);
  CHECK(semcom_config_set(cfg, "ppo.epochs", "3") == SEMCOM_OK);
  CHECK(semcom_config_set(cfg, "ppo.epochs", "x") == SEMCOM_ERR_PARSE);
  CHECK(semcom_config_set(cfg, "ppo.nothing", "3") == SEMCOM_ERR_PARSE);
  size_t needed = 0;
  CHECK(semcom_config_serialize(cfg, nullptr, 0, &needed) == SEMCOM_ERR_INVALID_ARGUMENT);
  REQUIRE(needed > 1);
  std::vector<char> buf(needed);
  REQUIRE(semcom_config_serialize(cfg, buf.data(), buf.size(), &needed) == SEMCOM_OK);
  const std::string text(buf.data());
  CHECK(text.find("ppo.epochs = 3") != std::string::npos);
  semcom_config* again = nullptr;
  REQUIRE(semcom_config_parse(text.c_str(), &again) == SEMCOM_OK);
  std::vector<char> buf2(needed);
  REQUIRE(semcom_config_serialize(again, buf2.data(), buf2.size(), nullptr) == SEMCOM_OK);
  CHECK(std::string(buf2.data()) == text);
  semcom_config_free(again);
  semcom_config_free(cfg);
  CHECK(semcom_config_load("/nonexistent/x.cfg", &cfg) == SEMCOM_ERR_IO);
}

TEST_CASE("environment episode through the C interface") {
  semcom_config* cfg = nullptr;
  REQUIRE(semcom_config_parse("config.version = 1\nscenario.users = 3\nscenario.rbs = 4\n", &cfg) == SEMCOM_OK);
  semcom_env* env = nullptr;
  REQUIRE(semcom_env_create(cfg, 7, &env) == SEMCOM_OK);
  const size_t dim = semcom_env_state_dim(env), actions = semcom_env_action_count(env);
  CHECK(dim == 14);
  CHECK(actions == 12);
  std::vector<double> state(dim);
  std::vector<uint8_t> mask(actions);
  double reward = 0;
  int terminal = 0;
  CHECK(semcom_env_mask(env, mask.data(), mask.size()) == SEMCOM_ERR_INVALID_ARGUMENT);
  CHECK(semcom_env_step(env, 0, state.data(), dim, &reward, &terminal) == SEMCOM_ERR_INVALID_ARGUMENT);
  REQUIRE(semcom_env_reset(env, state.data(), dim) == SEMCOM_OK);
  CHECK(semcom_env_reset(env, state.data(), dim - 1) == SEMCOM_ERR_INVALID_ARGUMENT);
  REQUIRE(semcom_env_reset(env, state.data(), dim) == SEMCOM_OK);
  REQUIRE(semcom_env_step(env, 0, state.data(), dim, &reward, &terminal) == SEMCOM_OK);
  CHECK(reward == 0.0);
  CHECK(terminal == 0);
  REQUIRE(semcom_env_mask(env, mask.data(), mask.size()) == SEMCOM_OK);
  CHECK(mask[0] == 0);
  CHECK(mask[4] == 0);
  CHECK(mask[1] == 1);
  CHECK(semcom_env_step(env, 4, state.data(), dim, &reward, &terminal) == SEMCOM_ERR_CONSTRAINT);
  REQUIRE(semcom_env_step(env, 1, state.data(), dim, &reward, &terminal) == SEMCOM_OK);
  REQUIRE(semcom_env_step(env, 2, state.data(), dim, &reward, &terminal) == SEMCOM_OK);
  CHECK(terminal == 1);
  CHECK(reward < 0.0);
  CHECK(semcom_env_step(env, 3, state.data(), dim, &reward, &terminal) == SEMCOM_ERR_INVALID_ARGUMENT);
  semcom_env_free(env);
  semcom_config_free(cfg);
}

TEST_CASE("run, policy reload and oracle") {
  const auto out = fs::temp_directory_path() / "semcom_capi_run";
  fs::remove_all(out);
  semcom_config* cfg = nullptr;
  REQUIRE(semcom_config_parse("config.version = 1\nscenario.users = 2\nscenario.rbs = 3\n"
                              "experiment.iterations = 3\nppo.trajectories = 4\npolicy.hidden = 8\n",
                              &cfg) == SEMCOM_OK);
  REQUIRE(semcom_config_set(cfg, "experiment.out_dir", out.string().c_str()) == SEMCOM_OK);
  REQUIRE(semcom_run(cfg) == SEMCOM_OK);
  CHECK(fs::exists(out / "curve_ppo_seed1.csv"));

  semcom_policy* policy = nullptr;
  REQUIRE(semcom_policy_load((out / "policy_seed1.bin").string().c_str(), &policy) == SEMCOM_OK);
  semcom_env* env = nullptr;
  REQUIRE(semcom_env_create(cfg, 1, &env) == SEMCOM_OK);
  std::vector<double> state(semcom_env_state_dim(env));
  std::vector<uint8_t> mask(semcom_env_action_count(env));
  REQUIRE(semcom_env_reset(env, state.data(), state.size()) == SEMCOM_OK);
  REQUIRE(semcom_env_mask(env, mask.data(), mask.size()) == SEMCOM_OK);
  int32_t action = -1;
  REQUIRE(semcom_policy_act(policy, state.data(), state.size(), mask.data(), mask.size(), &action) == SEMCOM_OK);
  CHECK(action >= 0);
  CHECK(action < 9);
  CHECK(semcom_policy_act(policy, state.data(), state.size() - 1, mask.data(), mask.size(), &action) ==
        SEMCOM_ERR_INVALID_ARGUMENT);
  CHECK(semcom_policy_load("/nonexistent/p.bin", &policy) == SEMCOM_ERR_IO);
  semcom_policy_free(policy);
  semcom_env_free(env);

  double best = 0.0;
  REQUIRE(semcom_config_set(cfg, "experiment.oracle_samples", "50") == SEMCOM_OK);
  REQUIRE(semcom_oracle(cfg, &best) == SEMCOM_OK);
  CHECK(best < 0.0);
  CHECK(fs::exists(out / "oracle_seed1.json"));

  const std::string dir = out.string();
  const char* two[] = {dir.c_str(), dir.c_str()};
  CHECK(semcom_compare(two, 2, (out / "cmp").string().c_str()) == SEMCOM_OK);
  CHECK(semcom_compare(two, 1, (out / "cmp").string().c_str()) == SEMCOM_ERR_VALIDATION);

  REQUIRE(semcom_config_set(cfg, "scenario.users", "5") == SEMCOM_OK);
  REQUIRE(semcom_config_set(cfg, "scenario.rbs", "10") == SEMCOM_OK);
  CHECK(semcom_oracle(cfg, &best) == SEMCOM_ERR_CAP_EXCEEDED);
  semcom_config_free(cfg);
  fs::remove_all(out);
}
