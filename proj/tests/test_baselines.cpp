#include <doctest.h>

#include <cmath>
#include <limits>
#include <set>

#include "semcom/baselines.hpp"
#include "semcom/error.hpp"

using namespace semcom;

namespace {

ScenarioConfig scenario(int users, int rbs) {
  ScenarioConfig cfg;
  cfg.users = users;
  cfg.rbs = rbs;
  cfg.user_cpu_hz = {1.5e9};
  cfg.user_cycles_per_bit = {0.2};
  cfg.zeta_user = {1e-27};
  cfg.broadcast_user_vectors();
  return cfg;
}

ScenarioConfig dominant_scenario() {
  auto cfg = scenario(1, 1);
  cfg.interference_min_w = cfg.interference_max_w = 1e-12;
  cfg.fixed_channel = true;
  return cfg;
}

}  // namespace

TEST_CASE("random policy is uniform over unmasked actions") {
  std::vector<std::uint8_t> mask(30, 1);
  for (int a : {3, 7, 11}) mask[static_cast<std::size_t>(a)] = 0;
  Rng rng(42);
  std::vector<int> counts(30, 0);
  const int n = 100'000;
  for (int i = 0; i < n; ++i) ++counts[static_cast<std::size_t>(random_policy(mask, rng))];
  const double p = 1.0 / 27.0, sigma = std::sqrt(n * p * (1 - p));
  for (int a = 0; a < 30; ++a) {
    if (!mask[static_cast<std::size_t>(a)]) {
      CHECK(counts[static_cast<std::size_t>(a)] == 0);
    } else {
      CHECK(std::abs(counts[static_cast<std::size_t>(a)] - n * p) <= 3.5 * sigma);
    }
  }
}

TEST_CASE("random episodes respect the mask and give zero intermediate reward") {
  Environment env(scenario(5, 10));
  auto streams = EpisodeStreams::from_seed(1);
  for (int e = 0; e < 200; ++e) {
    auto s = env.reset(streams.channel);
    for (int t = 0; t < 5; ++t) {
      const auto mask = env.action_mask(s);
      const int a = random_policy(mask, streams.exploration);
      REQUIRE(mask[static_cast<std::size_t>(a)] == 1);
      auto out = env.step(s, a, streams.semantic);
      if (t < 4) CHECK(out.reward == 0.0);
      s = out.next;
    }
  }
  const auto curve = random_curve(env, 3, 8, 5);
  CHECK(curve.size() == 3);
  CHECK(curve == random_curve(env, 3, 8, 5));
}

TEST_CASE("candidate enumeration") {
  CHECK(candidate_count(2, 2, 2) == 8);
  CHECK(candidate_count(5, 10) == 7'348'320);
  CHECK(candidate_count(1, 4) == 12);
  CHECK(candidate_count(40, 40) == std::numeric_limits<std::uint64_t>::max());
  std::vector<JointAssignment> seen;
  for_each_assignment(2, 2, 2, [&](const JointAssignment& a) { seen.push_back(a); });
  REQUIRE(seen.size() == 8);
  for (std::size_t i = 1; i < seen.size(); ++i) CHECK(seen[i - 1] < seen[i]);
  for (const auto& a : seen) CHECK(a[0].rb != a[1].rb);
}

TEST_CASE("single-user oracle is the best of the 3Q actions") {
  const auto cfg = scenario(1, 4);
  Environment env(cfg);
  auto crng = make_stream(3, Stream::Channel);
  env.reset(crng);
  const Rng rng = make_stream(3, Stream::Evaluation);
  const auto r = oracle_search(cfg, env.task(), env.channel(), 200, rng);
  CHECK(r.candidates == 12);
  double best = -std::numeric_limits<double>::infinity();
  for (int id = 0; id < env.action_count(); ++id) {
    Rng copy = rng;
    const auto v = evaluate_assignment(cfg, env.task(), env.channel(),
                                       JointAssignment({AssignAction::from_id(id, 4)}, 4), copy, 200);
    best = std::max(best, v.mean);
  }
  CHECK(r.value.mean == best);
}

TEST_CASE("oracle dominates every assignment under common draws") {
  const auto cfg = scenario(2, 3);
  Environment env(cfg);
  auto crng = make_stream(4, Stream::Channel);
  env.reset(crng);
  const Rng rng = make_stream(4, Stream::Evaluation);
  const auto r = oracle_search(cfg, env.task(), env.channel(), 100, rng);
  CHECK(r.candidates == 54);
  int count = 0;
  std::optional<JointAssignment> first_best;
  double best = -std::numeric_limits<double>::infinity();
  for (int k0 = 0; k0 < 3; ++k0)
    for (int q0 = 0; q0 < 3; ++q0)
      for (int k1 = 0; k1 < 3; ++k1)
        for (int q1 = 0; q1 < 3; ++q1) {
          if (q0 == q1) continue;
          ++count;
          JointAssignment a({{k0, q0}, {k1, q1}}, 3);
          Rng copy = rng;
          const double v = evaluate_assignment(cfg, env.task(), env.channel(), a, copy, 100).mean;
          CHECK(v <= r.value.mean);
          if (v > best) {
            best = v;
            first_best = a;
          }
        }
  CHECK(count == 54);
  CHECK(r.value.mean == best);
  CHECK(r.best == *first_best);
}

TEST_CASE("oracle refuses oversized searches") {
  const auto cfg = scenario(5, 10);
  Environment env(cfg);
  auto crng = make_stream(1, Stream::Channel);
  env.reset(crng);
  const Rng rng(1);
  try {
    oracle_search(cfg, env.task(), env.channel(), 10, rng, 1'000'000);
    FAIL("expected CapExceeded");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::CapExceeded);
  }
}

TEST_CASE("replay buffer evicts oldest and samples stored items") {
  ReplayBuffer buf(3);
  for (int i = 0; i < 5; ++i) buf.push(Transition{{double(i)}, i, 0.0, {}, {}, true});
  CHECK(buf.size() == 3);
  Rng rng(1);
  std::set<int> actions;
  for (const auto* t : buf.sample(200, rng)) actions.insert(t->action);
  CHECK(actions == std::set<int>{2, 3, 4});
}

TEST_CASE("greedy and epsilon-greedy selection") {
  Environment env(scenario(2, 3));
  auto rng = make_stream(1, Stream::PolicyInit);
  const auto zero = nn::Network::zeros_like(nn::Network::init(env.state_dim(), std::vector<int>{8}, env.action_count(), rng));
  std::vector<double> x(static_cast<std::size_t>(env.state_dim()), 0.5);
  std::vector<std::uint8_t> mask(9, 1);
  mask[0] = mask[1] = 0;
  CHECK(greedy_action(zero, x, mask) == 2);

  // epsilon = 1 behaves as the random policy.
  Rng e(9);
  std::vector<int> counts(9, 0);
  const int n = 70'000;
  for (int i = 0; i < n; ++i) ++counts[static_cast<std::size_t>(epsilon_greedy(zero, x, mask, 1.0, e))];
  CHECK(counts[0] == 0);
  CHECK(counts[1] == 0);
  const double p = 1.0 / 7.0, sigma = std::sqrt(n * p * (1 - p));
  for (int a = 2; a < 9; ++a) CHECK(std::abs(counts[static_cast<std::size_t>(a)] - n * p) <= 3.5 * sigma);
  for (int i = 0; i < 100; ++i) CHECK(epsilon_greedy(zero, x, mask, 0.0, e) == 2);
}

TEST_CASE("regression step reduces the loss") {
  auto rng = make_stream(2, Stream::PolicyInit);
  auto online = nn::Network::init(4, std::vector<int>{16}, 6, rng);
  const auto target = online;
  std::vector<Transition> data;
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 32; ++i)
    data.push_back({{u(rng), u(rng), u(rng), u(rng)}, i % 6, u(rng), {0, 0, 0, 0}, std::vector<std::uint8_t>(6, 1), true});
  std::vector<const Transition*> batch;
  for (const auto& t : data) batch.push_back(&t);
  nn::Adam adam(online, 1e-2);
  const double first = dqn_update(online, target, batch, adam, 1.0);
  double last = first;
  for (int i = 0; i < 200; ++i) last = dqn_update(online, target, batch, adam, 1.0);
  CHECK(last < 0.1 * first);
}

TEST_CASE("DQN learns a dominant encoder") {
  Environment env(dominant_scenario());
  DqnConfig cfg;
  cfg.hidden = {32, 32};
  cfg.batch_size = 16;
  cfg.train_every_steps = 1;
  cfg.target_sync_updates = 50;
  const auto r = dqn_train(env, cfg, 100, 16, 3);
  CHECK(r.curve.size() == 100);
  auto crng = make_stream(1, Stream::Channel);
  const auto s = env.reset(crng);
  CHECK(greedy_action(r.q_network, env.encode_state(s), env.action_mask(s)) == 2);
  CHECK(r.curve == dqn_train(env, cfg, 100, 16, 3).curve);
}

TEST_CASE("DQN config validation") {
  DqnConfig c;
  CHECK(validation_errors(c).empty());
  c.batch_size = 0;
  c.epsilon_end = 2.0;
  CHECK(validation_errors(c).size() >= 2);
}
