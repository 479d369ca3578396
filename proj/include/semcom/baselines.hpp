#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <span>
#include <vector>

#include "semcom/curve.hpp"
#include "semcom/env.hpp"
#include "semcom/ppo.hpp"
#include "semcom/tinynn.hpp"

namespace semcom {

/// Any per-step decision rule: (state, mask, rng) -> unmasked action id.
using Policy = std::function<int(const EpisodeState&, std::span<const std::uint8_t>, Rng&)>;

/// Uniform over unmasked actions.
int random_policy(std::span<const std::uint8_t> mask, Rng& rng);

/// Runs `episodes` full episodes under `policy`; returns the per-iteration
/// curve row (mean terminal reward, violation counts).
CurveRow run_episodes(Environment& env, const Policy& policy, int episodes, EpisodeStreams& streams);

/// Random policy evaluated with the same iteration structure as PPO.
LearningCurve random_curve(Environment& env, int iterations, int episodes_per_iteration, std::uint64_t seed);

struct OracleResult {
  JointAssignment best;
  RewardEstimate value;
  std::uint64_t candidates = 0;
};

/// K^U * Q! / (Q - U)!.
std::uint64_t candidate_count(int users, int rbs, int encoders = kEncoderCount);

/// Exhaustive search over every feasible joint assignment. All candidates see
/// the same semantic draws (a copy of `rng`); ties go to the lexicographically
/// smallest assignment. Throws CapExceeded above `cap` candidates.
OracleResult oracle_search(const ScenarioConfig& cfg, const SemanticTask& task, const ChannelState& channel,
                           int samples, const Rng& rng, std::uint64_t cap = 1'000'000,
                           int encoders = kEncoderCount);

/// Visits every feasible assignment in lexicographic order.
void for_each_assignment(int users, int rbs, int encoders, const std::function<void(const JointAssignment&)>& fn);

struct DqnConfig {
  int replay_capacity = 10'000;
  int batch_size = 64;
  double learning_rate = 1e-3;
  double epsilon_start = 1.0;
  double epsilon_end = 0.05;
  double epsilon_fraction = 0.5;   // share of training over which epsilon anneals
  int target_sync_updates = 200;
  int train_every_steps = 4;
  double discount = 1.0;
  std::vector<int> hidden = {128, 128};

  bool operator==(const DqnConfig&) const = default;
};

std::vector<std::string> validation_errors(const DqnConfig& cfg);

struct Transition {
  std::vector<double> state;
  int action = 0;
  double reward = 0.0;
  std::vector<double> next_state;
  std::vector<std::uint8_t> next_mask;
  bool terminal = false;
};

class ReplayBuffer {
 public:
  explicit ReplayBuffer(int capacity) : capacity_(static_cast<std::size_t>(capacity)) {}
  void push(Transition t);
  std::size_t size() const { return items_.size(); }
  std::vector<const Transition*> sample(int n, Rng& rng) const;

 private:
  std::size_t capacity_;
  std::deque<Transition> items_;
};

/// Masked argmax of Q-values; lowest id on ties.
int greedy_action(const nn::Network& q_net, std::span<const double> state, std::span<const std::uint8_t> mask);

/// epsilon-greedy over the masked action space.
int epsilon_greedy(const nn::Network& q_net, std::span<const double> state, std::span<const std::uint8_t> mask,
                   double epsilon, Rng& rng);

/// One regression step toward r + discount * max Q_target(s'); returns the loss
/// before the update.
double dqn_update(nn::Network& online, const nn::Network& target, std::span<const Transition* const> batch,
                  nn::Adam& optimizer, double discount);

struct DqnResult {
  LearningCurve curve;
  nn::Network q_network;
};

DqnResult dqn_train(Environment& env, const DqnConfig& cfg, int iterations, int episodes_per_iteration,
                    std::uint64_t seed);

}  // namespace semcom
