#include "semcom/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include "semcom/error.hpp"

namespace semcom {

int random_policy(std::span<const std::uint8_t> mask, Rng& rng) {
  const auto valid = std::count_if(mask.begin(), mask.end(), [](std::uint8_t m) { return m != 0; });
  require(valid > 0, ErrorKind::Domain, "random_policy: every action is masked");
  std::uniform_int_distribution<long> pick(0, valid - 1);
  long n = pick(rng);
  for (std::size_t a = 0; a < mask.size(); ++a) {
    if (!mask[a]) continue;
    if (n-- == 0) return static_cast<int>(a);
  }
  return -1;  // unreachable
}

CurveRow run_episodes(Environment& env, const Policy& policy, int episodes, EpisodeStreams& streams) {
  require(episodes >= 1, ErrorKind::Domain, "run_episodes: need at least one episode");
  CurveRow row;
  double sum = 0.0;
  for (int e = 0; e < episodes; ++e) {
    EpisodeState state = env.reset(streams.channel);
    for (int t = 0; t < env.config().users; ++t) {
      const auto mask = env.action_mask(state);
      const int a = policy(state, mask, streams.exploration);
      auto out = env.step(state, a, streams.semantic);
      if (out.terminal) {
        sum += out.reward;
        row.delay_violations += out.delay_violations;
        row.energy_violations += out.energy_violations;
      }
      state = std::move(out.next);
    }
  }
  row.mean_reward = sum / episodes;
  return row;
}

LearningCurve random_curve(Environment& env, int iterations, int episodes_per_iteration, std::uint64_t seed) {
  auto streams = EpisodeStreams::from_seed(seed);
  const Policy policy = [](const EpisodeState&, std::span<const std::uint8_t> mask, Rng& rng) {
    return random_policy(mask, rng);
  };
  LearningCurve curve;
  for (int it = 1; it <= iterations; ++it) {
    auto row = run_episodes(env, policy, episodes_per_iteration, streams);
    row.iteration = it;
    curve.push_back(row);
  }
  return curve;
}

std::uint64_t candidate_count(int users, int rbs, int encoders) {
  if (users > rbs || users < 0) return 0;
  constexpr auto kMax = std::numeric_limits<std::uint64_t>::max();
  std::uint64_t n = 1;
  auto mul = [&](std::uint64_t f) {
    if (f != 0 && n > kMax / f) n = kMax;
    else n *= f;
  };
  for (int i = 0; i < users; ++i) {
    mul(static_cast<std::uint64_t>(encoders));
    mul(static_cast<std::uint64_t>(rbs - i));
  }
  return n;
}

void for_each_assignment(int users, int rbs, int encoders, const std::function<void(const JointAssignment&)>& fn) {
  std::vector<AssignAction> current(static_cast<std::size_t>(users));
  std::vector<std::uint8_t> used(static_cast<std::size_t>(rbs), 0);
  std::function<void(int)> visit = [&](int user) {
    if (user == users) {
      fn(JointAssignment(current, rbs));
      return;
    }
    for (int k = 0; k < encoders; ++k) {
      for (int q = 0; q < rbs; ++q) {
        if (used[static_cast<std::size_t>(q)]) continue;
        used[static_cast<std::size_t>(q)] = 1;
        current[static_cast<std::size_t>(user)] = {k, q};
        visit(user + 1);
        used[static_cast<std::size_t>(q)] = 0;
      }
    }
  };
  visit(0);
}

OracleResult oracle_search(const ScenarioConfig& cfg, const SemanticTask& task, const ChannelState& channel,
                           int samples, const Rng& rng, std::uint64_t cap, int encoders) {
  require(samples >= 1, ErrorKind::Domain, "oracle_search: samples must be >= 1");
  require(encoders >= 1 && encoders <= kEncoderCount, ErrorKind::Domain, "oracle_search: bad encoder count");
  const std::uint64_t total = candidate_count(cfg.users, cfg.rbs, encoders);
  require(total <= cap, ErrorKind::CapExceeded,
          "oracle_search: " + std::to_string(total) + " candidates exceed the cap of " + std::to_string(cap));
  const int U = cfg.users;
  const int Q = cfg.rbs;
  const auto S = static_cast<std::size_t>(samples);

  // Every candidate sees the same semantic seeds, and each user's draw depends
  // only on (seed, user), so per-user log-likelihoods can be tabulated once.
  Rng draws = rng;
  std::vector<std::uint64_t> seeds(S);
  for (auto& s : seeds) s = draws();

  auto slot = [&](int i, int k, int q) { return static_cast<std::size_t>((i * encoders + k) * Q + q); };
  std::vector<UserOutcome> links(static_cast<std::size_t>(U * encoders * Q));
  std::vector<double> ll(links.size() * S);
  for (int i = 0; i < U; ++i)
    for (int k = 0; k < encoders; ++k)
      for (int q = 0; q < Q; ++q) {
        const auto idx = slot(i, k, q);
        links[idx] = user_link(cfg, channel, i, {k, q});
        for (std::size_t s = 0; s < S; ++s)
          ll[idx * S + s] = semantic_log_likelihood(task, k, links[idx].sinr, seeds[s], i);
      }

  std::optional<JointAssignment> best;
  double best_mean = -std::numeric_limits<double>::infinity();
  std::uint64_t visited = 0;
  std::vector<std::size_t> idx(static_cast<std::size_t>(U));
  for_each_assignment(U, Q, encoders, [&](const JointAssignment& a) {
    ++visited;
    int nd = 0, ne = 0;
    for (int i = 0; i < U; ++i) {
      idx[static_cast<std::size_t>(i)] = slot(i, a[i].encoder, a[i].rb);
      const auto& l = links[idx[static_cast<std::size_t>(i)]];
      nd += l.feasible.delay_ok ? 0 : 1;
      ne += l.feasible.energy_ok ? 0 : 1;
    }
    double sum = 0.0;
    for (std::size_t s = 0; s < S; ++s) {
      double lls = 0.0;
      for (int i = 0; i < U; ++i) lls += ll[idx[static_cast<std::size_t>(i)] * S + s];
      sum += combine_reward(cfg, lls, nd, ne);
    }
    const double mean = sum / samples;
    if (mean > best_mean) {
      best_mean = mean;
      best = a;
    }
  });
  require(best.has_value(), ErrorKind::Domain, "oracle_search: no feasible assignment");

  Rng replay = rng;
  OracleResult result{*best, evaluate_assignment(cfg, task, channel, *best, replay, samples), visited};
  return result;
}

std::vector<std::string> validation_errors(const DqnConfig& c) {
  std::vector<std::string> errs;
  auto check = [&](bool ok, const char* msg) {
    if (!ok) errs.emplace_back(msg);
  };
  check(c.replay_capacity >= c.batch_size, "dqn.replay must be >= dqn.batch");
  check(c.batch_size >= 1, "dqn.batch must be >= 1");
  check(c.learning_rate > 0.0, "dqn.learning_rate must be positive");
  check(c.epsilon_start >= 0.0 && c.epsilon_start <= 1.0, "dqn.epsilon_start must lie in [0, 1]");
  check(c.epsilon_end >= 0.0 && c.epsilon_end <= 1.0, "dqn.epsilon_end must lie in [0, 1]");
  check(c.epsilon_fraction > 0.0 && c.epsilon_fraction <= 1.0, "dqn.epsilon_fraction must lie in (0, 1]");
  check(c.target_sync_updates >= 1, "dqn.target_sync must be >= 1");
  check(c.train_every_steps >= 1, "dqn.train_every must be >= 1");
  check(c.discount >= 0.0 && c.discount <= 1.0, "dqn.discount must lie in [0, 1]");
  check(!c.hidden.empty(), "dqn.hidden must list at least one layer");
  return errs;
}

void ReplayBuffer::push(Transition t) {
  if (items_.size() == capacity_) items_.pop_front();
  items_.push_back(std::move(t));
}

std::vector<const Transition*> ReplayBuffer::sample(int n, Rng& rng) const {
  require(!items_.empty(), ErrorKind::Domain, "replay buffer is empty");
  std::uniform_int_distribution<std::size_t> pick(0, items_.size() - 1);
  std::vector<const Transition*> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out.push_back(&items_[pick(rng)]);
  return out;
}

namespace {

int masked_argmax(const double* q, std::span<const std::uint8_t> mask) {
  int best = -1;
  for (std::size_t a = 0; a < mask.size(); ++a) {
    if (!mask[a]) continue;
    if (best < 0 || q[a] > q[static_cast<std::size_t>(best)]) best = static_cast<int>(a);
  }
  require(best >= 0, ErrorKind::Domain, "greedy_action: every action is masked");
  return best;
}

}  // namespace

int greedy_action(const nn::Network& q_net, std::span<const double> state, std::span<const std::uint8_t> mask) {
  require(static_cast<int>(mask.size()) == q_net.outputs(), ErrorKind::Shape, "greedy_action: mask width mismatch");
  const nn::Matrix x = Eigen::Map<const nn::Matrix>(state.data(), 1, static_cast<Eigen::Index>(state.size()));
  const nn::Matrix q = q_net.forward(x);
  return masked_argmax(q.data(), mask);
}

int epsilon_greedy(const nn::Network& q_net, std::span<const double> state, std::span<const std::uint8_t> mask,
                   double epsilon, Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  if (unit(rng) < epsilon) return random_policy(mask, rng);
  return greedy_action(q_net, state, mask);
}

double dqn_update(nn::Network& online, const nn::Network& target, std::span<const Transition* const> batch,
                  nn::Adam& optimizer, double discount) {
  require(!batch.empty(), ErrorKind::Domain, "dqn_update: empty batch");
  const auto n = static_cast<Eigen::Index>(batch.size());
  const auto dim = static_cast<Eigen::Index>(batch.front()->state.size());
  nn::Matrix x(n, dim), xn(n, dim);
  std::vector<int> actions(batch.size());
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto& t = *batch[static_cast<std::size_t>(r)];
    require(static_cast<Eigen::Index>(t.state.size()) == dim, ErrorKind::Shape, "dqn_update: ragged states");
    for (Eigen::Index c = 0; c < dim; ++c) {
      x(r, c) = t.state[static_cast<std::size_t>(c)];
      xn(r, c) = t.terminal ? 0.0 : t.next_state[static_cast<std::size_t>(c)];
    }
    actions[static_cast<std::size_t>(r)] = t.action;
  }
  const nn::Matrix q_next = target.forward(xn);
  std::vector<double> targets(batch.size());
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto& t = *batch[static_cast<std::size_t>(r)];
    double y = t.reward;
    if (!t.terminal) y += discount * q_next(r, masked_argmax(q_next.row(r).data(), t.next_mask));
    targets[static_cast<std::size_t>(r)] = y;
  }
  nn::ForwardCache cache;
  const nn::Matrix q = online.forward(x, cache);
  nn::Matrix d;
  const double loss = nn::selected_mse(q, actions, targets, &d);
  optimizer.step(online, online.backward(cache, d), -1.0);
  return loss;
}

DqnResult dqn_train(Environment& env, const DqnConfig& cfg, int iterations, int episodes_per_iteration,
                    std::uint64_t seed) {
  if (auto errs = validation_errors(cfg); !errs.empty()) fail(ErrorKind::Validation, errs.front());
  require(iterations >= 1 && episodes_per_iteration >= 1, ErrorKind::Validation, "dqn: empty training budget");
  auto streams = EpisodeStreams::from_seed(seed);
  auto init_rng = make_stream(seed, Stream::PolicyInit);
  auto replay_rng = make_stream(seed, Stream::Exploration, 1);

  DqnResult result;
  result.q_network = nn::Network::init(env.state_dim(), cfg.hidden, env.action_count(), init_rng);
  nn::Network target = result.q_network;
  nn::Adam adam(result.q_network, cfg.learning_rate);
  ReplayBuffer replay(cfg.replay_capacity);

  const double total_steps = static_cast<double>(iterations) * episodes_per_iteration * env.config().users;
  const double anneal_steps = std::max(1.0, cfg.epsilon_fraction * total_steps);
  long steps = 0;
  long updates = 0;
  const std::vector<double> zero_state(static_cast<std::size_t>(env.state_dim()), 0.0);

  for (int it = 1; it <= iterations; ++it) {
    CurveRow row;
    row.iteration = it;
    double sum = 0.0;
    for (int e = 0; e < episodes_per_iteration; ++e) {
      EpisodeState state = env.reset(streams.channel);
      auto x = env.encode_state(state);
      for (int t = 0; t < env.config().users; ++t) {
        const auto mask = env.action_mask(state);
        const double frac = std::min(1.0, static_cast<double>(steps) / anneal_steps);
        const double eps = cfg.epsilon_start + frac * (cfg.epsilon_end - cfg.epsilon_start);
        const int a = epsilon_greedy(result.q_network, x, mask, eps, streams.exploration);
        auto out = env.step(state, a, streams.semantic);
        Transition tr;
        tr.state = x;
        tr.action = a;
        tr.reward = out.reward;
        tr.terminal = out.terminal;
        if (out.terminal) {
          tr.next_state = zero_state;
          sum += out.reward;
          row.delay_violations += out.delay_violations;
          row.energy_violations += out.energy_violations;
        } else {
          tr.next_state = env.encode_state(out.next);
          tr.next_mask = env.action_mask(out.next);
        }
        x = tr.next_state;
        replay.push(std::move(tr));
        state = std::move(out.next);
        ++steps;

        if (replay.size() >= static_cast<std::size_t>(cfg.batch_size) && steps % cfg.train_every_steps == 0) {
          const auto batch = replay.sample(cfg.batch_size, replay_rng);
          const double loss = dqn_update(result.q_network, target, batch, adam, cfg.discount);
          if (!std::isfinite(loss)) fail(ErrorKind::Divergence, "dqn: non-finite loss at iteration " + std::to_string(it));
          if (++updates % cfg.target_sync_updates == 0) target = result.q_network;
        }
      }
    }
    row.mean_reward = sum / episodes_per_iteration;
    result.curve.push_back(row);
  }
  return result;
}

}  // namespace semcom
