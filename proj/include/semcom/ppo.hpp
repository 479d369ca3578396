#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "semcom/curve.hpp"
#include "semcom/env.hpp"
#include "semcom/tinynn.hpp"

namespace semcom {

/// Independent random streams driving one training run.
struct EpisodeStreams {
  Rng channel;
  Rng semantic;
  Rng exploration;

  static EpisodeStreams from_seed(std::uint64_t seed);
};

enum class ObjectiveVariant { KlPenalty, Clipped };
enum class OptimizerKind { GradientAscent, Adam };

struct PpoConfig {
  int trajectories_per_iteration = 64;
  int epochs = 10;                 // T inner ascent steps
  double learning_rate = 1e-3;     // delta
  double initial_lambda = 1.0;
  double kl_target = 0.01;         // tau
  double lambda_factor = 2.0;
  bool adaptive_lambda = true;
  int max_iterations = 500;
  ObjectiveVariant objective = ObjectiveVariant::KlPenalty;
  double clip_ratio = 0.2;
  OptimizerKind optimizer = OptimizerKind::Adam;
  bool stop_at_convergence = false;
  bool center_rewards = true;      // subtract the batch-mean reward before weighting
  double lambda_min = 0.01;        // clamp for the adapted penalty
  double kl_stop = 1.0;            // end the epochs once KL exceeds kl_stop * tau; 0 disables
  std::vector<int> hidden = {128, 128};

  bool operator==(const PpoConfig&) const = default;
};

std::vector<std::string> validation_errors(const PpoConfig& cfg);

/// One episode of U assignment steps under the collection policy.
struct Trajectory {
  nn::Matrix states;                // U x state_dim
  std::vector<std::uint8_t> masks;  // U x action_count, row-major
  std::vector<int> actions;
  std::vector<double> old_log_probs;
  double reward = 0.0;
  int delay_violations = 0;
  int energy_violations = 0;

  int steps() const { return static_cast<int>(actions.size()); }
};

/// Trajectories stacked into contiguous arrays for batched evaluation.
struct Batch {
  nn::Matrix states;                // (W * U) x state_dim
  std::vector<std::uint8_t> masks;  // (W * U) x action_count
  std::vector<int> actions;
  std::vector<double> old_log_probs;
  std::vector<double> rewards;      // one per trajectory
  int steps_per_trajectory = 0;
  int action_count = 0;

  static Batch stack(const std::vector<Trajectory>& trajectories);
  int trajectories() const { return static_cast<int>(rewards.size()); }
};

std::vector<Trajectory> collect(const nn::Network& policy, Environment& env, int n, EpisodeStreams& streams);

/// (1/W) sum_w R_w * prod_t pi(a_t|s_t) / pi*(a_t|s_t), ratios taken in log space.
double surrogate(const nn::Network& policy, const Batch& batch);

/// Batch-average KL(pi_old(.|s), pi(.|s)) over every stored state.
double batch_kl(const nn::Network& old_policy, const nn::Network& policy, const Batch& batch);

struct ObjectiveValue {
  double objective = 0.0;
  double surrogate = 0.0;
  double kl = 0.0;
};

/// KlPenalty: J = A - lambda * KL(pi_old, pi).
/// Clipped: J = (1/W) sum_w min(rho_w R_w, clip(rho_w, 1-eps, 1+eps) R_w).
/// Writes dJ/dtheta into `grad` when non-null. `baseline` is subtracted from
/// every trajectory reward before weighting.
ObjectiveValue objective(const nn::Network& policy, const nn::Network& old_policy, const Batch& batch,
                         double lambda, ObjectiveVariant variant, double clip_ratio,
                         nn::Gradient* grad = nullptr, double baseline = 0.0);

double adapt_penalty(double lambda, double measured_kl, double kl_target, double factor);

struct TrainResult {
  LearningCurve curve;
  nn::Network policy;
  std::optional<int> converged_at;
};

using IterationHook = std::function<void(const CurveRow&)>;

/// Collect -> T ascent epochs on J -> lambda adaptation, until the iteration
/// cap (or convergence, when `stop_at_convergence`). Throws Divergence on a
/// non-finite objective.
TrainResult train(Environment& env, const PpoConfig& cfg, std::uint64_t seed, bool record_wall_time = false,
                  const IterationHook& hook = {});

}  // namespace semcom
