#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "semcom/costmodel.hpp"
#include "semcom/netmodel.hpp"
#include "semcom/rng.hpp"
#include "semcom/scenario.hpp"
#include "semcom/semtask.hpp"

namespace semcom {

/// Encoder and RB chosen for one user. Flat id = encoder * Q + rb (0-based rb).
struct AssignAction {
  int encoder = 0;
  int rb = 0;

  int id(int rbs) const { return encoder * rbs + rb; }
  static AssignAction from_id(int id, int rbs) { return {id / rbs, id % rbs}; }
  bool operator==(const AssignAction&) const = default;
};

/// Complete decision for every user: distinct RBs, encoder indices in range.
class JointAssignment {
 public:
  JointAssignment(std::vector<AssignAction> per_user, int rbs);

  int users() const { return static_cast<int>(per_user_.size()); }
  const AssignAction& operator[](int user) const { return per_user_[static_cast<std::size_t>(user)]; }
  const std::vector<AssignAction>& actions() const { return per_user_; }
  RBAllocation allocation(int rbs) const;

  auto operator<=>(const JointAssignment& other) const {
    return std::lexicographical_compare_three_way(
        per_user_.begin(), per_user_.end(), other.per_user_.begin(), other.per_user_.end(),
        [](const AssignAction& a, const AssignAction& b) {
          if (auto c = a.encoder <=> b.encoder; c != 0) return c;
          return a.rb <=> b.rb;
        });
  }
  bool operator==(const JointAssignment& other) const { return per_user_ == other.per_user_; }

 private:
  std::vector<AssignAction> per_user_;
};

/// s_t = [I, p, nu] plus the assignments made so far. `allocated[q]` is 1 for
/// RBs already taken this episode; `step` counts assignments made (0-based t).
struct EpisodeState {
  std::vector<double> interference;
  std::vector<std::array<double, 2>> positions;
  std::vector<std::uint8_t> allocated;
  std::vector<AssignAction> assigned;
  int step = 0;

  bool operator==(const EpisodeState&) const = default;
};

struct UserOutcome {
  AssignAction action;
  double sinr = 0.0;
  double rate_bps = 0.0;
  CostBreakdown cost;
  Feasibility feasible;
  int true_class = 0;
  int predicted_class = 0;
  double log_likelihood = 0.0;
};

struct StepOutcome {
  EpisodeState next;
  double reward = 0.0;
  bool terminal = false;
  std::vector<UserOutcome> users;  // filled on the terminal step only
  int delay_violations = 0;
  int energy_violations = 0;
};

/// Terminal reward for one semantic draw, with per-user diagnostics.
struct TerminalEvaluation {
  double reward = 0.0;
  double log_likelihood = 0.0;
  int delay_violations = 0;
  int energy_violations = 0;
  std::vector<UserOutcome> users;
};

struct RewardEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  int samples = 0;
};

/// Deterministic (channel-only) part of a user's outcome.
UserOutcome user_link(const ScenarioConfig& cfg, const ChannelState& channel, int user,
                      const AssignAction& action);

/// Semantic log-likelihood of one labelled sample for `user`, drawn from the
/// per-user stream derived from `semantic_seed`.
double semantic_log_likelihood(const SemanticTask& task, int encoder, double sinr,
                               std::uint64_t semantic_seed, int user, int* true_class = nullptr,
                               int* predicted = nullptr);

/// Log-likelihood sum minus delay and energy penalties.
double combine_reward(const ScenarioConfig& cfg, double log_likelihood_sum, int delay_violations,
                      int energy_violations);

TerminalEvaluation terminal_reward(const ScenarioConfig& cfg, const SemanticTask& task,
                                   const ChannelState& channel, const JointAssignment& assignment,
                                   std::uint64_t semantic_seed);

/// Mean terminal reward over `samples` semantic draws with the channel held
/// fixed. Each draw consumes one value from `rng` as its semantic seed.
RewardEstimate evaluate_assignment(const ScenarioConfig& cfg, const SemanticTask& task,
                                   const ChannelState& channel, const JointAssignment& assignment,
                                   Rng& rng, int samples);

/// Sequential assignment environment: user t is served at step t.
class Environment {
 public:
  explicit Environment(ScenarioConfig cfg);
  Environment(ScenarioConfig cfg, std::shared_ptr<const SemanticTask> task);

  const ScenarioConfig& config() const { return cfg_; }
  const SemanticTask& task() const { return *task_; }
  std::shared_ptr<const SemanticTask> shared_task() const { return task_; }
  const ChannelState& channel() const { return channel_; }

  int action_count() const { return kEncoderCount * cfg_.rbs; }
  int state_dim() const { return 2 * cfg_.rbs + 2 * cfg_.users; }

  /// Fresh channel (unless the scenario pins it), empty allocation, t = 0.
  EpisodeState reset(Rng& channel_rng);

  /// Replaces the current channel; used by evaluation tools.
  EpisodeState reset_with(ChannelState channel);

  std::vector<std::uint8_t> action_mask(const EpisodeState& state) const;

  /// Network input: log10(I) min-max scaled, positions over radius, nu bits.
  std::vector<double> encode_state(const EpisodeState& state) const;

  StepOutcome step(const EpisodeState& state, int action_id, Rng& semantic_rng) const;

 private:
  ScenarioConfig cfg_;
  std::shared_ptr<const SemanticTask> task_;
  ChannelState channel_;
};

}  // namespace semcom
