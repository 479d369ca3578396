#include "semcom/env.hpp"

#include <cmath>
#include <numeric>

#include "semcom/error.hpp"

namespace semcom {

JointAssignment::JointAssignment(std::vector<AssignAction> per_user, int rbs) : per_user_(std::move(per_user)) {
  std::vector<std::uint8_t> used(static_cast<std::size_t>(rbs > 0 ? rbs : 0), 0);
  for (const auto& a : per_user_) {
    require(a.encoder >= 0 && a.encoder < kEncoderCount, ErrorKind::Constraint,
            "assignment: encoder index out of range");
    require(a.rb >= 0 && a.rb < rbs, ErrorKind::Constraint, "assignment: RB index out of range");
    require(used[static_cast<std::size_t>(a.rb)] == 0, ErrorKind::Constraint,
            "assignment: RB " + std::to_string(a.rb) + " assigned twice");
    used[static_cast<std::size_t>(a.rb)] = 1;
  }
}

RBAllocation JointAssignment::allocation(int rbs) const {
  std::vector<int> rb_of_user;
  rb_of_user.reserve(per_user_.size());
  for (const auto& a : per_user_) rb_of_user.push_back(a.rb);
  return RBAllocation::from_assignment(rbs, rb_of_user);
}

UserOutcome user_link(const ScenarioConfig& cfg, const ChannelState& channel, int user, const AssignAction& action) {
  UserOutcome out;
  out.action = action;
  std::vector<std::uint8_t> row(static_cast<std::size_t>(cfg.rbs), 0);
  row[static_cast<std::size_t>(action.rb)] = 1;
  out.sinr = sinr(cfg, channel, user, action.rb);
  out.rate_bps = transmission_rate(row, channel, cfg, user);
  out.cost = cost_breakdown(cfg, cfg.encoders[static_cast<std::size_t>(action.encoder)], user, out.rate_bps);
  out.feasible = feasibility(out.cost, cfg);
  return out;
}

double semantic_log_likelihood(const SemanticTask& task, int encoder, double sinr, std::uint64_t semantic_seed,
                               int user, int* true_class, int* predicted) {
  const auto& protos = task.prototypes[static_cast<std::size_t>(encoder)];
  Rng rng = derive(semantic_seed, static_cast<std::uint64_t>(user));
  std::uniform_int_distribution<int> label(0, protos.classes() - 1);
  const int y = label(rng);
  const Feature received = channel_perturb(encode(protos, y, task.intra_class_sigma, rng), sinr, task.kappa, rng);
  if (true_class) *true_class = y;
  if (predicted) *predicted = classify(received, protos);
  return class_log_probabilities(received, protos, task.temperature)[static_cast<std::size_t>(y)];
}

double combine_reward(const ScenarioConfig& cfg, double log_likelihood_sum, int delay_violations,
                      int energy_violations) {
  return log_likelihood_sum - cfg.lambda_delay * delay_violations - cfg.lambda_energy * energy_violations;
}

TerminalEvaluation terminal_reward(const ScenarioConfig& cfg, const SemanticTask& task, const ChannelState& channel,
                                   const JointAssignment& assignment, std::uint64_t semantic_seed) {
  require(assignment.users() == cfg.users, ErrorKind::Constraint, "assignment must cover every user");
  TerminalEvaluation ev;
  ev.users.reserve(static_cast<std::size_t>(cfg.users));
  for (int i = 0; i < cfg.users; ++i) {
    UserOutcome u = user_link(cfg, channel, i, assignment[i]);
    u.log_likelihood = semantic_log_likelihood(task, u.action.encoder, u.sinr, semantic_seed, i, &u.true_class,
                                               &u.predicted_class);
    ev.log_likelihood += u.log_likelihood;
    ev.delay_violations += u.feasible.delay_ok ? 0 : 1;
    ev.energy_violations += u.feasible.energy_ok ? 0 : 1;
    ev.users.push_back(u);
  }
  ev.reward = combine_reward(cfg, ev.log_likelihood, ev.delay_violations, ev.energy_violations);
  return ev;
}

RewardEstimate evaluate_assignment(const ScenarioConfig& cfg, const SemanticTask& task, const ChannelState& channel,
                                   const JointAssignment& assignment, Rng& rng, int samples) {
  require(samples >= 1, ErrorKind::Domain, "evaluate_assignment: samples must be >= 1");
  require(assignment.users() == cfg.users, ErrorKind::Constraint, "assignment must cover every user");
  (void)assignment.allocation(cfg.rbs);

  std::vector<UserOutcome> links;
  for (int i = 0; i < cfg.users; ++i) links.push_back(user_link(cfg, channel, i, assignment[i]));
  int nd = 0, ne = 0;
  for (const auto& l : links) {
    nd += l.feasible.delay_ok ? 0 : 1;
    ne += l.feasible.energy_ok ? 0 : 1;
  }

  std::vector<double> rewards(static_cast<std::size_t>(samples));
  double sum = 0.0;
  for (auto& r : rewards) {
    const std::uint64_t seed = rng();
    double ll = 0.0;
    for (int i = 0; i < cfg.users; ++i)
      ll += semantic_log_likelihood(task, links[static_cast<std::size_t>(i)].action.encoder,
                                    links[static_cast<std::size_t>(i)].sinr, seed, i);
    r = combine_reward(cfg, ll, nd, ne);
    sum += r;
  }
  RewardEstimate est;
  est.samples = samples;
  est.mean = sum / samples;
  if (samples > 1) {
    double ss = 0.0;
    for (double r : rewards) ss += (r - est.mean) * (r - est.mean);
    est.std_error = std::sqrt(ss / (samples - 1) / samples);
  }
  return est;
}

Environment::Environment(ScenarioConfig cfg) : Environment(cfg, nullptr) {}

Environment::Environment(ScenarioConfig cfg, std::shared_ptr<const SemanticTask> task) : cfg_(std::move(cfg)) {
  cfg_.broadcast_user_vectors();
  validate(cfg_);
  task_ = task ? std::move(task) : SemanticTask::build(cfg_);
  auto rng = make_stream(cfg_.channel_seed, Stream::Channel);
  channel_ = sample_channel(cfg_, rng);
}

EpisodeState Environment::reset(Rng& channel_rng) {
  if (!cfg_.fixed_channel) channel_ = sample_channel(cfg_, channel_rng);
  return reset_with(channel_);
}

EpisodeState Environment::reset_with(ChannelState channel) {
  require(channel.distance.size() == static_cast<std::size_t>(cfg_.users) &&
              channel.interference.size() == static_cast<std::size_t>(cfg_.rbs),
          ErrorKind::Shape, "channel does not match the scenario dimensions");
  validate(channel);
  channel_ = std::move(channel);
  EpisodeState s;
  s.interference = channel_.interference;
  s.positions = channel_.positions;
  s.allocated.assign(static_cast<std::size_t>(cfg_.rbs), 0);
  s.step = 0;
  return s;
}

std::vector<std::uint8_t> Environment::action_mask(const EpisodeState& state) const {
  require(state.step < cfg_.users, ErrorKind::Constraint, "action_mask: episode already finished");
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(action_count()));
  for (int k = 0; k < kEncoderCount; ++k)
    for (int q = 0; q < cfg_.rbs; ++q)
      mask[static_cast<std::size_t>(k * cfg_.rbs + q)] = state.allocated[static_cast<std::size_t>(q)] == 0;
  return mask;
}

std::vector<double> Environment::encode_state(const EpisodeState& state) const {
  std::vector<double> x;
  x.reserve(static_cast<std::size_t>(state_dim()));
  const double lo = std::log10(cfg_.interference_min_w);
  const double span = std::log10(cfg_.interference_max_w) - lo;
  for (double i : state.interference) x.push_back(span > 0.0 ? (std::log10(i) - lo) / span : 0.0);
  for (const auto& p : state.positions) {
    x.push_back(p[0] / cfg_.cell_radius_m);
    x.push_back(p[1] / cfg_.cell_radius_m);
  }
  for (auto v : state.allocated) x.push_back(v);
  return x;
}

StepOutcome Environment::step(const EpisodeState& state, int action_id, Rng& semantic_rng) const {
  require(state.step >= 0 && state.step < cfg_.users, ErrorKind::Constraint, "step: episode already finished");
  require(action_id >= 0 && action_id < action_count(), ErrorKind::Constraint, "step: action id out of range");
  const auto action = AssignAction::from_id(action_id, cfg_.rbs);
  require(state.allocated[static_cast<std::size_t>(action.rb)] == 0, ErrorKind::Constraint,
          "step: masked action (RB " + std::to_string(action.rb) + " already allocated)");

  StepOutcome out;
  out.next = state;
  out.next.assigned.push_back(action);
  out.next.allocated[static_cast<std::size_t>(action.rb)] = 1;
  out.next.step += 1;
  out.terminal = out.next.step == cfg_.users;
  if (out.terminal) {
    const std::uint64_t seed = semantic_rng();
    auto ev = terminal_reward(cfg_, *task_, channel_, JointAssignment(out.next.assigned, cfg_.rbs), seed);
    out.reward = ev.reward;
    out.users = std::move(ev.users);
    out.delay_violations = ev.delay_violations;
    out.energy_violations = ev.energy_violations;
  }
  return out;
}

}  // namespace semcom
