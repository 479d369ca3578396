// Command-line front end; talks to the simulator only through the C API.
#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "semcom/semcom.h"

namespace {

int exit_code(semcom_status st) {
  switch (st) {
    case SEMCOM_OK: return 0;
    case SEMCOM_ERR_INVALID_ARGUMENT:
    case SEMCOM_ERR_PARSE:
    case SEMCOM_ERR_VALIDATION: return 1;
    default: return 2;
  }
}

int report(semcom_status st) {
  if (st != SEMCOM_OK) std::fprintf(stderr, "expcli: %s: %s\n", semcom_status_name(st), semcom_last_error());
  return exit_code(st);
}

struct Common {
  std::string config;
  std::string seeds;
  std::string out;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "config file (defaults built in when omitted)");
  cmd->add_option("--seed", c.seeds, "seed list, e.g. 1,2,3");
  cmd->add_option("--out", c.out, "output directory");
}

// Loads the config and applies command-line overrides as ordinary keys.
semcom_status load(const Common& c, std::vector<std::pair<std::string, std::string>> overrides,
                   semcom_config** cfg) {
  semcom_status st = c.config.empty() ? semcom_config_default(cfg) : semcom_config_load(c.config.c_str(), cfg);
  if (st != SEMCOM_OK) return st;
  if (!c.seeds.empty()) overrides.emplace_back("experiment.seeds", c.seeds);
  if (!c.out.empty()) overrides.emplace_back("experiment.out_dir", c.out);
  for (const auto& [k, v] : overrides) {
    st = semcom_config_set(*cfg, k.c_str(), v.c_str());
    if (st != SEMCOM_OK) return st;
  }
  return SEMCOM_OK;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Semantic-communication resource allocation experiments"};
  app.require_subcommand(1);

  Common run_opts, profile_opts, oracle_opts;
  std::string algo, iters;
  auto* run = app.add_subcommand("run", "train or evaluate one algorithm for every seed");
  add_common(run, run_opts);
  run->add_option("--algo", algo, "ppo, dqn, random or oracle");
  run->add_option("--iters", iters, "iteration budget");

  auto* profile = app.add_subcommand("profile", "accuracy versus SINR for every encoder");
  add_common(profile, profile_opts);

  auto* oracle = app.add_subcommand("oracle", "exhaustive search on the first seed's channel");
  add_common(oracle, oracle_opts);

  std::vector<std::string> dirs;
  std::string compare_out = "compare";
  auto* compare = app.add_subcommand("compare", "compare two or more run directories");
  compare->add_option("runs", dirs, "run directories (the first is the reference)")->required()->expected(2, -1);
  compare->add_option("--out", compare_out, "report directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  semcom_config* cfg = nullptr;
  semcom_status st = SEMCOM_OK;
  if (*run) {
    std::vector<std::pair<std::string, std::string>> o;
    if (!algo.empty()) o.emplace_back("experiment.algorithm", algo);
    if (!iters.empty()) o.emplace_back("experiment.iterations", iters);
    st = load(run_opts, o, &cfg);
    if (st == SEMCOM_OK) st = semcom_run(cfg);
  } else if (*profile) {
    st = load(profile_opts, {}, &cfg);
    if (st == SEMCOM_OK) st = semcom_profile(cfg);
  } else if (*oracle) {
    st = load(oracle_opts, {}, &cfg);
    double best = 0.0;
    if (st == SEMCOM_OK) st = semcom_oracle(cfg, &best);
    if (st == SEMCOM_OK) std::printf("oracle value %.10g\n", best);
  } else if (*compare) {
    std::vector<const char*> ptrs;
    for (const auto& d : dirs) ptrs.push_back(d.c_str());
    st = semcom_compare(ptrs.data(), ptrs.size(), compare_out.c_str());
    if (st == SEMCOM_OK) std::printf("report written to %s\n", compare_out.c_str());
  }
  semcom_config_free(cfg);
  return report(st);
}
