#include <doctest.h>

#include <cmath>
#include <numeric>

#include "semcom/env.hpp"
#include "semcom/error.hpp"

using namespace semcom;

namespace {

int count(const std::vector<std::uint8_t>& v) { return std::accumulate(v.begin(), v.end(), 0); }

}  // namespace

TEST_CASE("flat action ids") {
  CHECK(AssignAction{2, 3}.id(10) == 23);
  CHECK(AssignAction::from_id(23, 10) == AssignAction{2, 3});
  CHECK(AssignAction::from_id(9, 10) == AssignAction{0, 9});
}

TEST_CASE("joint assignment validation and order") {
  CHECK_NOTHROW(JointAssignment({{0, 1}, {2, 0}}, 2));
  CHECK_THROWS_AS(JointAssignment({{0, 1}, {2, 1}}, 2), Error);
  CHECK_THROWS_AS(JointAssignment({{3, 0}}, 2), Error);
  CHECK_THROWS_AS(JointAssignment({{0, 2}}, 2), Error);
  CHECK(JointAssignment({{0, 1}, {2, 0}}, 3) < JointAssignment({{1, 0}, {0, 1}}, 3));
  CHECK(JointAssignment({{0, 1}, {0, 2}}, 3) < JointAssignment({{0, 1}, {1, 0}}, 3));
}

TEST_CASE("reset is seeded and clears the allocation") {
  ScenarioConfig cfg;
  Environment env(cfg);
  auto r1 = make_stream(9, Stream::Channel);
  auto r2 = make_stream(9, Stream::Channel);
  const auto s1 = env.reset(r1);
  const auto c1 = env.channel();
  const auto s2 = env.reset(r2);
  CHECK(s1 == s2);
  CHECK(c1 == env.channel());
  CHECK(count(s1.allocated) == 0);
  CHECK(s1.step == 0);

  auto rng = make_stream(10, Stream::Channel);
  for (int n = 0; n < 10000; ++n) {
    const auto s = env.reset(rng);
    for (const auto& p : s.positions) REQUIRE(std::hypot(p[0], p[1]) <= cfg.cell_radius_m * (1 + 1e-12));
  }
}

TEST_CASE("fixed channel survives resets") {
  ScenarioConfig cfg;
  cfg.fixed_channel = true;
  Environment env(cfg);
  const auto c0 = env.channel();
  auto rng = make_stream(1, Stream::Channel);
  env.reset(rng);
  env.reset(rng);
  CHECK(env.channel() == c0);
}

TEST_CASE("mask shrinks by three per assignment") {
  ScenarioConfig cfg;
  Environment env(cfg);
  auto rng = make_stream(1, Stream::Channel);
  auto sem = make_stream(1, Stream::Semantic);
  auto s = env.reset(rng);
  CHECK(count(env.action_mask(s)) == 30);
  auto out = env.step(s, AssignAction{1, 4}.id(10), sem);
  CHECK(count(env.action_mask(out.next)) == 27);
  CHECK(out.next.allocated[4] == 1);
  auto m = env.action_mask(out.next);
  for (int k = 0; k < 3; ++k) CHECK(m[static_cast<std::size_t>(AssignAction{k, 4}.id(10))] == 0);
  for (int t = 1; t < cfg.users; ++t) {
    const auto mask = env.action_mask(out.next);
    CHECK(count(mask) == 3 * (cfg.rbs - t));
    int a = 0;
    while (!mask[static_cast<std::size_t>(a)]) ++a;
    out = env.step(out.next, a, sem);
    CHECK(out.next.allocated[4] == 1);
  }
  CHECK(out.terminal);
}

TEST_CASE("masked or out-of-range actions are rejected") {
  ScenarioConfig cfg;
  Environment env(cfg);
  auto rng = make_stream(1, Stream::Channel);
  auto sem = make_stream(1, Stream::Semantic);
  auto s = env.reset(rng);
  auto out = env.step(s, 4, sem);
  try {
    env.step(out.next, 14, sem);
    FAIL("masked action accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Constraint);
  }
  CHECK_THROWS_AS(env.step(out.next, 30, sem), Error);
  CHECK_THROWS_AS(env.step(out.next, -1, sem), Error);
}

TEST_CASE("state encoding") {
  ScenarioConfig cfg;
  Environment env(cfg);
  auto rng = make_stream(2, Stream::Channel);
  auto s = env.reset(rng);
  const auto x = env.encode_state(s);
  REQUIRE(x.size() == static_cast<std::size_t>(env.state_dim()));
  CHECK(env.state_dim() == 2 * 10 + 2 * 5);
  for (int q = 0; q < cfg.rbs; ++q) {
    const double expect = (std::log10(s.interference[static_cast<std::size_t>(q)]) + 9.0) / 9.0;
    CHECK(x[static_cast<std::size_t>(q)] == doctest::Approx(expect).epsilon(1e-12));
  }
  for (int i = 0; i < cfg.users; ++i) {
    CHECK(x[static_cast<std::size_t>(cfg.rbs + 2 * i)] == doctest::Approx(s.positions[static_cast<std::size_t>(i)][0] / 500.0));
  }
  for (int q = 0; q < cfg.rbs; ++q) CHECK(x[static_cast<std::size_t>(cfg.rbs + 2 * cfg.users + q)] == 0.0);
}

TEST_CASE("reward composition") {
  ScenarioConfig cfg;
  CHECK(combine_reward(cfg, -0.7, 1, 0) == doctest::Approx(-1.7).epsilon(1e-15));
  CHECK(combine_reward(cfg, 0.0, 0, 0) == 0.0);
  cfg.lambda_energy = 2.5;
  CHECK(combine_reward(cfg, -0.3, 2, 1) == doctest::Approx(-0.3 - 2 - 2.5).epsilon(1e-15));
}

TEST_CASE("terminal reward matches its parts; intermediate rewards are zero") {
  ScenarioConfig cfg;
  Environment env(cfg);
  auto rng = make_stream(3, Stream::Channel);
  for (int ep = 0; ep < 50; ++ep) {
    auto sem = make_stream(static_cast<std::uint64_t>(ep), Stream::Semantic);
    auto sem_copy = sem;
    auto s = env.reset(rng);
    std::vector<AssignAction> chosen;
    StepOutcome out;
    for (int t = 0; t < cfg.users; ++t) {
      const AssignAction a{(ep + t) % 3, (2 * t + ep) % cfg.rbs};
      chosen.push_back(a);
      out = env.step(s, a.id(cfg.rbs), sem);
      CHECK(out.terminal == (t == cfg.users - 1));
      if (!out.terminal) CHECK(out.reward == 0.0);
      s = out.next;
    }
    const auto ev = terminal_reward(cfg, env.task(), env.channel(), JointAssignment(chosen, cfg.rbs), sem_copy());
    CHECK(out.reward == ev.reward);
    CHECK(out.reward <= 0.0);
    double ll = 0.0;
    int nd = 0, ne = 0;
    for (const auto& u : out.users) {
      ll += u.log_likelihood;
      nd += u.cost.total_delay > cfg.delay_cap_s;
      ne += u.cost.total_energy > cfg.energy_cap_j;
    }
    CHECK(out.delay_violations == nd);
    CHECK(out.energy_violations == ne);
    CHECK(out.reward == doctest::Approx(ll - nd - ne).epsilon(1e-12));
  }
}

TEST_CASE("zero penalty weights leave the pure log-likelihood") {
  ScenarioConfig cfg;
  cfg.lambda_delay = 1e-300;
  cfg.lambda_energy = 1e-300;
  Environment env(cfg);
  const JointAssignment a({{0, 0}, {1, 1}, {2, 2}, {0, 3}, {1, 4}}, cfg.rbs);
  const auto ev = terminal_reward(cfg, env.task(), env.channel(), a, 77);
  CHECK(ev.reward == doctest::Approx(ev.log_likelihood).epsilon(1e-12));
}

TEST_CASE("deterministic replay") {
  ScenarioConfig cfg;
  Environment env(cfg);
  auto run = [&] {
    auto rng = make_stream(4, Stream::Channel);
    auto sem = make_stream(4, Stream::Semantic);
    auto s = env.reset(rng);
    std::vector<double> rewards;
    for (int t = 0; t < cfg.users; ++t) {
      auto out = env.step(s, AssignAction{2, t}.id(cfg.rbs), sem);
      rewards.push_back(out.reward);
      for (const auto& u : out.users) rewards.push_back(u.log_likelihood);
      s = out.next;
    }
    return rewards;
  };
  CHECK(run() == run());
}

TEST_CASE("evaluate_assignment") {
  ScenarioConfig cfg;
  Environment env(cfg);
  const JointAssignment a({{2, 0}, {2, 1}, {1, 2}, {0, 3}, {2, 4}}, cfg.rbs);

  auto r1 = make_stream(5, Stream::Evaluation);
  auto r2 = r1;
  const auto one = evaluate_assignment(cfg, env.task(), env.channel(), a, r1, 1);
  CHECK(one.mean == terminal_reward(cfg, env.task(), env.channel(), a, r2()).reward);

  auto ra = make_stream(6, Stream::Evaluation);
  auto rb = make_stream(7, Stream::Evaluation);
  const auto small = evaluate_assignment(cfg, env.task(), env.channel(), a, ra, 100);
  const auto big = evaluate_assignment(cfg, env.task(), env.channel(), a, rb, 10000);
  const double ratio = small.std_error / big.std_error;
  CHECK(ratio > 10.0 * 0.7);
  CHECK(ratio < 10.0 * 1.3);
  CHECK(std::abs(small.mean - big.mean) < 5 * small.std_error);

  // Penalties do not depend on the semantic draw.
  int nd = -1;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto ev = terminal_reward(cfg, env.task(), env.channel(), a, seed);
    if (nd < 0) nd = ev.delay_violations;
    CHECK(ev.delay_violations == nd);
  }
}
