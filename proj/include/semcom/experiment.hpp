#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "semcom/baselines.hpp"
#include "semcom/ppo.hpp"
#include "semcom/scenario.hpp"

namespace semcom {

enum class Algorithm { Ppo, Dqn, Random, Oracle };

const char* to_string(Algorithm algo);
Algorithm parse_algorithm(const std::string& name);

struct ExperimentSpec {
  Algorithm algorithm = Algorithm::Ppo;
  std::vector<std::uint64_t> seeds = {1};
  int iterations = 500;
  std::string out_dir = "out";
  bool sweep_sinr = false;
  std::vector<double> sinr_db = {0, 3, 6, 9, 12, 15, 18, 21, 24, 27};
  int profile_samples = 10'000;
  int oracle_samples = 1'000;
  std::uint64_t oracle_cap = 1'000'000;
  bool record_wall_time = false;

  bool operator==(const ExperimentSpec&) const = default;
};

/// Everything one config file describes.
struct Config {
  ScenarioConfig scenario;
  PpoConfig ppo;
  DqnConfig dqn;
  ExperimentSpec experiment;

  bool operator==(const Config&) const = default;
};

inline constexpr int kConfigVersion = 1;

/// Flat `section.key = value` text; `#` starts a comment. Unknown keys are
/// rejected; `config.version`, `scenario.users` and `scenario.rbs` are
/// required. Throws Parse with "<source>:<line>: ..." diagnostics, or
/// Validation listing every violated invariant.
Config parse_config(const std::string& text, const std::string& source = "<string>");
Config load_config(const std::filesystem::path& path);

/// Full key listing; parse_config(serialize_config(c)) == c.
std::string serialize_config(const Config& cfg);

/// Applies one `key = value` override with the same rules as the file parser.
void set_config_value(Config& cfg, const std::string& key, const std::string& value);

void validate(const Config& cfg);

/// Only the scenario keys, used to check that runs are comparable.
std::string scenario_fingerprint(const ScenarioConfig& cfg);

inline constexpr const char* kCurveSchema = "# schema: semcom.curve.v1";
inline constexpr const char* kProfileSchema = "# schema: semcom.profile.v1";
inline constexpr const char* kTraceSchema = "# schema: semcom.trace.v1";
inline constexpr const char* kCompareSchema = "# schema: semcom.compare.v1";

void write_curve_csv(const LearningCurve& curve, const std::filesystem::path& path);
LearningCurve read_curve_csv(const std::filesystem::path& path);

struct ProfileRow {
  int encoder = 0;
  double sinr_db = 0.0;
  double accuracy = 0.0;
};
void write_profile_csv(const std::vector<ProfileRow>& rows, const std::filesystem::path& path);

/// Episode trace: one row per step with the terminal costs attached.
void write_trace_csv(const std::vector<StepOutcome>& steps, const std::filesystem::path& path);

std::vector<ProfileRow> run_profile(const ScenarioConfig& scenario, const ExperimentSpec& spec, std::uint64_t seed);

struct SeedSummary {
  std::uint64_t seed = 0;
  double final_reward = 0.0;  // final 20-iteration moving average
  double peak_reward = 0.0;   // best moving average
  int convergence_iteration = -1;
  long delay_violations = 0;
  long energy_violations = 0;
  int iterations = 0;
};

/// Writes curve/profile/oracle artifacts for every seed plus summary.json
/// into spec.out_dir; returns the per-seed summaries.
std::vector<SeedSummary> run_experiment(const Config& cfg);

/// Exhaustive search on the channel of the seed's first episode.
OracleResult run_oracle(const Config& cfg, std::uint64_t seed);
void write_oracle_json(const OracleResult& result, std::uint64_t seed, const std::filesystem::path& path);

struct CompareEntry {
  std::string label;       // "<algorithm>" of the run
  std::string directory;
  std::vector<SeedSummary> seeds;
  double mean_final = 0.0;
  double final_ratio = 1.0;  // mean_final / reference mean_final
  bool has_oracle = false;
  double oracle_value = 0.0;
};

struct CompareReport {
  std::vector<CompareEntry> entries;
  std::string text;
};

/// Aligns the curves of >= 2 run directories (reference = first) and writes
/// comparison.csv, aligned_curves.csv and comparison.txt into out_dir.
/// Throws Validation when the runs were made on different scenarios.
CompareReport compare_runs(const std::vector<std::filesystem::path>& run_dirs, const std::filesystem::path& out_dir);

}  // namespace semcom
