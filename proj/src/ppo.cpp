#include "semcom/ppo.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>
#include <cmath>
#include <limits>
#include <optional>

#include "semcom/error.hpp"

namespace semcom {

EpisodeStreams EpisodeStreams::from_seed(std::uint64_t seed) {
  return {make_stream(seed, Stream::Channel), make_stream(seed, Stream::Semantic),
          make_stream(seed, Stream::Exploration)};
}

std::vector<std::string> validation_errors(const PpoConfig& c) {
  std::vector<std::string> errs;
  auto check = [&](bool ok, const char* msg) {
    if (!ok) errs.emplace_back(msg);
  };
  check(c.trajectories_per_iteration >= 1, "ppo.trajectories must be >= 1");
  check(c.epochs >= 1, "ppo.epochs must be >= 1");
  check(c.learning_rate > 0.0 && std::isfinite(c.learning_rate), "ppo.learning_rate must be positive");
  check(c.initial_lambda > 0.0, "ppo.lambda must be positive");
  check(c.kl_target > 0.0, "ppo.kl_target must be positive");
  check(c.kl_stop >= 0.0 && std::isfinite(c.kl_stop), "ppo.kl_stop must be >= 0");
  check(c.lambda_min >= 0.0 && std::isfinite(c.lambda_min), "ppo.lambda_min must be >= 0");
  check(c.lambda_factor > 1.0, "ppo.lambda_factor must exceed 1");
  check(c.max_iterations >= 1, "experiment.iterations must be >= 1");
  check(c.clip_ratio > 0.0 && c.clip_ratio < 1.0, "ppo.clip must lie in (0, 1)");
  check(!c.hidden.empty(), "policy.hidden must list at least one layer");
  for (int h : c.hidden) check(h > 0, "policy.hidden widths must be positive");
  return errs;
}

Batch Batch::stack(const std::vector<Trajectory>& trajectories) {
  require(!trajectories.empty(), ErrorKind::Shape, "batch needs at least one trajectory");
  const auto& first = trajectories.front();
  const int steps = first.steps();
  const auto dim = first.states.cols();
  const auto actions = static_cast<int>(first.masks.size() / static_cast<std::size_t>(steps));
  Batch b;
  b.steps_per_trajectory = steps;
  b.action_count = actions;
  b.states.resize(static_cast<Eigen::Index>(trajectories.size()) * steps, dim);
  Eigen::Index row = 0;
  for (const auto& t : trajectories) {
    require(t.steps() == steps && t.states.cols() == dim, ErrorKind::Shape, "trajectories differ in shape");
    b.states.middleRows(row, steps) = t.states;
    row += steps;
    b.masks.insert(b.masks.end(), t.masks.begin(), t.masks.end());
    b.actions.insert(b.actions.end(), t.actions.begin(), t.actions.end());
    b.old_log_probs.insert(b.old_log_probs.end(), t.old_log_probs.begin(), t.old_log_probs.end());
    b.rewards.push_back(t.reward);
  }
  return b;
}

std::vector<Trajectory> collect(const nn::Network& policy, Environment& env, int n, EpisodeStreams& streams) {
  require(n >= 1, ErrorKind::Domain, "collect: need at least one trajectory");
  const int users = env.config().users;
  std::vector<Trajectory> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int w = 0; w < n; ++w) {
    Trajectory tr;
    tr.states.resize(users, env.state_dim());
    EpisodeState state = env.reset(streams.channel);
    for (int t = 0; t < users; ++t) {
      const auto x = env.encode_state(state);
      const auto mask = env.action_mask(state);
      const auto dist = nn::forward(policy, x, mask);
      const int a = dist.sample(streams.exploration);
      for (int j = 0; j < env.state_dim(); ++j) tr.states(t, j) = x[static_cast<std::size_t>(j)];
      tr.masks.insert(tr.masks.end(), mask.begin(), mask.end());
      tr.actions.push_back(a);
      tr.old_log_probs.push_back(dist.log_prob(a));
      auto outcome = env.step(state, a, streams.semantic);
      if (outcome.terminal) {
        tr.reward = outcome.reward;
        tr.delay_violations = outcome.delay_violations;
        tr.energy_violations = outcome.energy_violations;
      }
      state = std::move(outcome.next);
    }
    out.push_back(std::move(tr));
  }
  return out;
}

namespace {

struct PolicyPass {
  nn::ForwardCache cache;
  nn::Matrix log_probs;  // masked log-softmax, rows = states
};

PolicyPass run_policy(const nn::Network& policy, const Batch& batch) {
  PolicyPass p;
  const nn::Matrix logits = policy.forward(batch.states, p.cache);
  p.log_probs = nn::masked_log_softmax(logits, batch.masks);
  return p;
}

// log prod_t pi(a_t|s_t) / pi_old(a_t|s_t) for every trajectory.
std::vector<double> log_ratios(const nn::Matrix& log_probs, const Batch& batch) {
  const int steps = batch.steps_per_trajectory;
  std::vector<double> lr(static_cast<std::size_t>(batch.trajectories()), 0.0);
  for (int w = 0; w < batch.trajectories(); ++w) {
    double s = 0.0;
    for (int t = 0; t < steps; ++t) {
      const auto row = static_cast<std::size_t>(w * steps + t);
      s += log_probs(static_cast<Eigen::Index>(row), batch.actions[row]) - batch.old_log_probs[row];
    }
    lr[static_cast<std::size_t>(w)] = s;
  }
  return lr;
}

double mean_kl(const nn::Matrix& old_lp, const nn::Matrix& new_lp, const std::vector<std::uint8_t>& masks) {
  const auto cols = static_cast<std::size_t>(old_lp.cols());
  double total = 0.0;
  for (Eigen::Index r = 0; r < old_lp.rows(); ++r) {
    double kl = 0.0;
    for (Eigen::Index c = 0; c < old_lp.cols(); ++c) {
      if (!masks[static_cast<std::size_t>(r) * cols + static_cast<std::size_t>(c)]) continue;
      kl += std::exp(old_lp(r, c)) * (old_lp(r, c) - new_lp(r, c));
    }
    total += kl;
  }
  return total / static_cast<double>(old_lp.rows());
}

}  // namespace

double surrogate(const nn::Network& policy, const Batch& batch) {
  const auto pass = run_policy(policy, batch);
  const auto lr = log_ratios(pass.log_probs, batch);
  double sum = 0.0;
  for (std::size_t w = 0; w < lr.size(); ++w) sum += batch.rewards[w] * std::exp(lr[w]);
  return sum / static_cast<double>(lr.size());
}

double batch_kl(const nn::Network& old_policy, const nn::Network& policy, const Batch& batch) {
  const nn::Matrix old_lp = nn::masked_log_softmax(old_policy.forward(batch.states), batch.masks);
  const nn::Matrix new_lp = nn::masked_log_softmax(policy.forward(batch.states), batch.masks);
  return mean_kl(old_lp, new_lp, batch.masks);
}

ObjectiveValue objective(const nn::Network& policy, const nn::Network& old_policy, const Batch& batch, double lambda,
                         ObjectiveVariant variant, double clip_ratio, nn::Gradient* grad, double baseline) {
  require(batch.trajectories() >= 1, ErrorKind::Domain, "objective: empty batch");
  require(lambda >= 0.0, ErrorKind::Domain, "objective: penalty must be >= 0");
  const auto pass = run_policy(policy, batch);
  const auto lr = log_ratios(pass.log_probs, batch);
  const int W = batch.trajectories();
  const int steps = batch.steps_per_trajectory;

  ObjectiveValue v;
  std::vector<double> coef(static_cast<std::size_t>(W), 0.0);  // dJ / d log rho_w
  double sum = 0.0;
  double clipped_sum = 0.0;
  for (int w = 0; w < W; ++w) {
    const double R = batch.rewards[static_cast<std::size_t>(w)] - baseline;
    const double rho = std::exp(lr[static_cast<std::size_t>(w)]);
    const double u = rho * R;
    sum += u;
    if (variant == ObjectiveVariant::Clipped) {
      const double c = std::clamp(rho, 1.0 - clip_ratio, 1.0 + clip_ratio) * R;
      const bool unclipped_active = u <= c;
      clipped_sum += unclipped_active ? u : c;
      coef[static_cast<std::size_t>(w)] = unclipped_active ? u / W : 0.0;
    } else {
      coef[static_cast<std::size_t>(w)] = u / W;
    }
  }
  v.surrogate = sum / W;
  if (!std::isfinite(v.surrogate)) fail(ErrorKind::Divergence, "objective: importance ratio overflow");

  std::optional<nn::Matrix> old_lp;
  if (variant == ObjectiveVariant::KlPenalty) {
    old_lp = nn::masked_log_softmax(old_policy.forward(batch.states), batch.masks);
    v.kl = mean_kl(*old_lp, pass.log_probs, batch.masks);
    v.objective = v.surrogate - lambda * v.kl;
  } else {
    v.objective = clipped_sum / W;
  }

  if (grad) {
    const auto rows = pass.log_probs.rows();
    const auto cols = pass.log_probs.cols();
    nn::Matrix d = nn::Matrix::Zero(rows, cols);
    const double kl_scale = variant == ObjectiveVariant::KlPenalty ? lambda / static_cast<double>(rows) : 0.0;
    for (int w = 0; w < W; ++w) {
      const double cw = coef[static_cast<std::size_t>(w)];
      for (int t = 0; t < steps; ++t) {
        const Eigen::Index r = w * steps + t;
        const std::uint8_t* m = batch.masks.data() + static_cast<std::size_t>(r * cols);
        for (Eigen::Index c = 0; c < cols; ++c) {
          if (!m[c]) continue;
          const double p = std::exp(pass.log_probs(r, c));
          // d log pi(a|s) / d logit_c = 1{c = a} - p_c
          double g = cw * ((c == batch.actions[static_cast<std::size_t>(r)] ? 1.0 : 0.0) - p);
          // d KL(old || new) / d logit_c = p_c - p_old_c
          if (kl_scale != 0.0) g -= kl_scale * (p - std::exp((*old_lp)(r, c)));
          d(r, c) = g;
        }
      }
    }
    *grad = policy.backward(pass.cache, d);
  }
  return v;
}

double adapt_penalty(double lambda, double measured_kl, double kl_target, double factor) {
  if (measured_kl > 1.5 * kl_target) return lambda * factor;
  if (measured_kl < kl_target / 1.5) return lambda / factor;
  return lambda;
}

TrainResult train(Environment& env, const PpoConfig& cfg, std::uint64_t seed, bool record_wall_time,
                  const IterationHook& hook) {
  if (auto errs = validation_errors(cfg); !errs.empty()) fail(ErrorKind::Validation, errs.front());
  auto streams = EpisodeStreams::from_seed(seed);
  auto init_rng = make_stream(seed, Stream::PolicyInit);
  TrainResult result;
  result.policy = nn::Network::init(env.state_dim(), cfg.hidden, env.action_count(), init_rng);
  std::optional<nn::Adam> adam;
  if (cfg.optimizer == OptimizerKind::Adam) adam.emplace(result.policy, cfg.learning_rate);

  double lambda = cfg.initial_lambda;
  std::vector<double> ma;
  double ma_sum = 0.0;
  for (int it = 1; it <= cfg.max_iterations; ++it) {
    const auto t0 = std::chrono::steady_clock::now();
    const nn::Network old = result.policy;
    const auto trajectories = collect(old, env, cfg.trajectories_per_iteration, streams);
    const Batch batch = Batch::stack(trajectories);

    double baseline = 0.0;
    if (cfg.center_rewards)
      baseline = std::accumulate(batch.rewards.begin(), batch.rewards.end(), 0.0) / batch.trajectories();
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
      nn::Gradient g;
      const auto v = objective(result.policy, old, batch, lambda, cfg.objective, cfg.clip_ratio, &g, baseline);
      if (!std::isfinite(v.objective))
        fail(ErrorKind::Divergence, "ppo: non-finite objective at iteration " + std::to_string(it));
      if (adam)
        adam->step(result.policy, g, +1.0);
      else
        result.policy = nn::ascend(result.policy, g, cfg.learning_rate);
      if (cfg.kl_stop > 0.0 && batch_kl(old, result.policy, batch) > cfg.kl_stop * cfg.kl_target) break;
    }
    if (!result.policy.all_finite())
      fail(ErrorKind::Divergence, "ppo: non-finite parameters at iteration " + std::to_string(it));

    CurveRow row;
    row.iteration = it;
    row.lambda = lambda;
    row.mean_kl = batch_kl(old, result.policy, batch);
    double reward_sum = 0.0;
    for (const auto& t : trajectories) {
      reward_sum += t.reward;
      row.delay_violations += t.delay_violations;
      row.energy_violations += t.energy_violations;
    }
    row.mean_reward = reward_sum / static_cast<double>(trajectories.size());
    if (cfg.objective == ObjectiveVariant::KlPenalty && cfg.adaptive_lambda)
      lambda = std::max(cfg.lambda_min, adapt_penalty(lambda, row.mean_kl, cfg.kl_target, cfg.lambda_factor));
    if (record_wall_time)
      row.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    result.curve.push_back(row);
    if (hook) hook(row);

    ma_sum += row.mean_reward;
    if (result.curve.size() > static_cast<std::size_t>(kMovingAverageWindow))
      ma_sum -= result.curve[result.curve.size() - 1 - kMovingAverageWindow].mean_reward;
    ma.push_back(ma_sum / static_cast<double>(std::min<std::size_t>(result.curve.size(), kMovingAverageWindow)));
    if (!result.converged_at && has_converged(ma)) {
      result.converged_at = it;
      if (cfg.stop_at_convergence) break;
    }
  }
  return result;
}

}  // namespace semcom
