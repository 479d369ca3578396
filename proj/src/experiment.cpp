#include "semcom/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include <json.hpp>

#include "semcom/error.hpp"

namespace semcom {

namespace fs = std::filesystem;

const char* to_string(Algorithm algo) {
  switch (algo) {
    case Algorithm::Ppo: return "ppo";
    case Algorithm::Dqn: return "dqn";
    case Algorithm::Random: return "random";
    case Algorithm::Oracle: return "oracle";
  }
  return "?";
}

Algorithm parse_algorithm(const std::string& name) {
  for (auto a : {Algorithm::Ppo, Algorithm::Dqn, Algorithm::Random, Algorithm::Oracle})
    if (name == to_string(a)) return a;
  fail(ErrorKind::Parse, "unknown algorithm '" + name + "' (expected ppo, dqn, random or oracle)");
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <class T>
T parse_number(const std::string& text) {
  const std::string s = trim(text);
  T v{};
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (s.empty() || ec != std::errc() || ptr != end) fail(ErrorKind::Parse, "expected a number, got '" + s + "'");
  if constexpr (std::is_floating_point_v<T>) {
    if (!std::isfinite(v)) fail(ErrorKind::Parse, "expected a finite number, got '" + s + "'");
  }
  return v;
}

bool parse_bool(const std::string& text) {
  const std::string s = trim(text);
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  fail(ErrorKind::Parse, "expected true or false, got '" + s + "'");
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  if (out.empty() || std::any_of(out.begin(), out.end(), [](const std::string& x) { return x.empty(); }))
    fail(ErrorKind::Parse, "expected a comma-separated list, got '" + trim(text) + "'");
  return out;
}

template <class T>
T parse_value(const std::string& v) {
  if constexpr (std::is_same_v<T, bool>) {
    return parse_bool(v);
  } else if constexpr (std::is_same_v<T, std::string>) {
    auto s = trim(v);
    if (s.empty()) fail(ErrorKind::Parse, "expected a non-empty value");
    return s;
  } else if constexpr (std::is_arithmetic_v<T>) {
    return parse_number<T>(v);
  } else {
    T out;
    for (const auto& item : split_list(v)) out.push_back(parse_number<typename T::value_type>(item));
    return out;
  }
}

template <class T>
std::string format_value(const T& v) {
  if constexpr (std::is_same_v<T, bool>) {
    return v ? "true" : "false";
  } else if constexpr (std::is_same_v<T, std::string>) {
    return v;
  } else if constexpr (std::is_floating_point_v<T>) {
    return format_double(v);
  } else if constexpr (std::is_arithmetic_v<T>) {
    return std::to_string(v);
  } else {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + format_value(v[i]);
    return out;
  }
}

struct Field {
  std::string key;
  std::function<void(Config&, const std::string&)> set;
  std::function<std::string(const Config&)> get;
};

template <class T, class Acc>
Field field(std::string key, Acc acc) {
  return {std::move(key), [acc](Config& c, const std::string& v) { acc(c) = parse_value<T>(v); },
          [acc](const Config& c) { return format_value<T>(acc(const_cast<Config&>(c))); }};
}

// The file takes N0 in W/MHz. The unit shift runs in long double so that
// "4e-15" lands on the same double as 4e-21, and writing back picks the
// shortest decimal that reproduces the stored W/Hz value.
double parse_noise(const std::string& text) {
  parse_number<double>(text);  // validates the syntax
  return static_cast<double>(std::strtold(trim(text).c_str(), nullptr) / 1e6L);
}

std::string format_noise(double w_per_hz) {
  char buf[64];
  for (int p = 1; p <= 21; ++p) {
    std::snprintf(buf, sizeof buf, "%.*Lg", p, static_cast<long double>(w_per_hz) * 1e6L);
    if (static_cast<double>(std::strtold(buf, nullptr) / 1e6L) == w_per_hz) return buf;
  }
  return format_double(w_per_hz * 1e6);
}

std::string format_objective(ObjectiveVariant v) { return v == ObjectiveVariant::KlPenalty ? "kl_penalty" : "clipped"; }

ObjectiveVariant parse_objective(const std::string& s) {
  if (s == "kl_penalty") return ObjectiveVariant::KlPenalty;
  if (s == "clipped") return ObjectiveVariant::Clipped;
  fail(ErrorKind::Parse, "expected kl_penalty or clipped, got '" + s + "'");
}

OptimizerKind parse_optimizer(const std::string& s) {
  if (s == "sgd") return OptimizerKind::GradientAscent;
  if (s == "adam") return OptimizerKind::Adam;
  fail(ErrorKind::Parse, "expected sgd or adam, got '" + s + "'");
}

const std::vector<Field>& scenario_fields() {
  static const std::vector<Field> fields = [] {
    std::vector<Field> f;
    f.push_back(field<int>("scenario.users", [](Config& c) -> int& { return c.scenario.users; }));
    f.push_back(field<int>("scenario.rbs", [](Config& c) -> int& { return c.scenario.rbs; }));
    f.push_back(field<double>("scenario.rb_bandwidth_hz", [](Config& c) -> double& { return c.scenario.rb_bandwidth_hz; }));
    f.push_back(field<double>("scenario.bs_power_w", [](Config& c) -> double& { return c.scenario.bs_power_w; }));
    f.push_back({"scenario.noise_w_per_mhz",
                 [](Config& c, const std::string& v) { c.scenario.noise_w_per_hz = parse_noise(v); },
                 [](const Config& c) { return format_noise(c.scenario.noise_w_per_hz); }});
    f.push_back(field<double>("scenario.interference_min_w", [](Config& c) -> double& { return c.scenario.interference_min_w; }));
    f.push_back(field<double>("scenario.interference_max_w", [](Config& c) -> double& { return c.scenario.interference_max_w; }));
    f.push_back(field<double>("scenario.cell_radius_m", [](Config& c) -> double& { return c.scenario.cell_radius_m; }));

    f.push_back(field<double>("compute.bs_cpu_hz", [](Config& c) -> double& { return c.scenario.bs_cpu_hz; }));
    f.push_back(field<double>("compute.bs_cycles_per_bit", [](Config& c) -> double& { return c.scenario.bs_cycles_per_bit; }));
    using Vec = std::vector<double>;
    f.push_back(field<Vec>("compute.user_cpu_hz", [](Config& c) -> Vec& { return c.scenario.user_cpu_hz; }));
    f.push_back(field<Vec>("compute.user_cycles_per_bit", [](Config& c) -> Vec& { return c.scenario.user_cycles_per_bit; }));
    f.push_back(field<Vec>("compute.zeta_user", [](Config& c) -> Vec& { return c.scenario.zeta_user; }));
    f.push_back(field<double>("compute.zeta_bs", [](Config& c) -> double& { return c.scenario.zeta_bs; }));
    f.push_back(field<double>("compute.image_bits", [](Config& c) -> double& { return c.scenario.image_bits; }));
    f.push_back(field<double>("compute.decoder_bits", [](Config& c) -> double& { return c.scenario.decoder_bits; }));

    f.push_back(field<double>("limits.delay_s", [](Config& c) -> double& { return c.scenario.delay_cap_s; }));
    f.push_back(field<double>("limits.energy_j", [](Config& c) -> double& { return c.scenario.energy_cap_j; }));
    f.push_back(field<double>("limits.lambda_delay", [](Config& c) -> double& { return c.scenario.lambda_delay; }));
    f.push_back(field<double>("limits.lambda_energy", [](Config& c) -> double& { return c.scenario.lambda_energy; }));

    f.push_back(field<int>("semantic.classes", [](Config& c) -> int& { return c.scenario.classes; }));
    f.push_back(field<double>("semantic.kappa", [](Config& c) -> double& { return c.scenario.kappa; }));
    f.push_back(field<double>("semantic.temperature", [](Config& c) -> double& { return c.scenario.similarity_temperature; }));
    f.push_back(field<double>("semantic.intra_sigma", [](Config& c) -> double& { return c.scenario.intra_class_sigma; }));
    f.push_back(field<std::uint64_t>("semantic.prototype_seed", [](Config& c) -> std::uint64_t& { return c.scenario.prototype_seed; }));

    for (std::size_t k = 0; k < kEncoderCount; ++k) {
      const std::string p = "encoder." + std::to_string(k) + ".";
      f.push_back(field<std::string>(p + "name", [k](Config& c) -> std::string& { return c.scenario.encoders[k].name; }));
      f.push_back(field<double>(p + "model_bits", [k](Config& c) -> double& { return c.scenario.encoders[k].model_bits; }));
      f.push_back(field<double>(p + "output_bits", [k](Config& c) -> double& { return c.scenario.encoders[k].output_bits; }));
      f.push_back(field<int>(p + "feature_dim", [k](Config& c) -> int& { return c.scenario.encoders[k].feature_dim; }));
      f.push_back(field<double>(p + "margin", [k](Config& c) -> double& { return c.scenario.encoders[k].margin; }));
    }

    f.push_back(field<bool>("env.fixed_channel", [](Config& c) -> bool& { return c.scenario.fixed_channel; }));
    f.push_back(field<std::uint64_t>("env.channel_seed", [](Config& c) -> std::uint64_t& { return c.scenario.channel_seed; }));
    return f;
  }();
  return fields;
}

const std::vector<Field>& all_fields() {
  static const std::vector<Field> fields = [] {
    std::vector<Field> f = scenario_fields();
    using Ints = std::vector<int>;
    f.push_back(field<Ints>("policy.hidden", [](Config& c) -> Ints& { return c.ppo.hidden; }));

    f.push_back(field<int>("ppo.trajectories", [](Config& c) -> int& { return c.ppo.trajectories_per_iteration; }));
    f.push_back(field<int>("ppo.epochs", [](Config& c) -> int& { return c.ppo.epochs; }));
    f.push_back(field<double>("ppo.learning_rate", [](Config& c) -> double& { return c.ppo.learning_rate; }));
    f.push_back(field<double>("ppo.lambda", [](Config& c) -> double& { return c.ppo.initial_lambda; }));
    f.push_back(field<double>("ppo.kl_target", [](Config& c) -> double& { return c.ppo.kl_target; }));
    f.push_back(field<double>("ppo.lambda_factor", [](Config& c) -> double& { return c.ppo.lambda_factor; }));
    f.push_back(field<bool>("ppo.adaptive_lambda", [](Config& c) -> bool& { return c.ppo.adaptive_lambda; }));
    f.push_back({"ppo.objective", [](Config& c, const std::string& v) { c.ppo.objective = parse_objective(trim(v)); },
                 [](const Config& c) { return format_objective(c.ppo.objective); }});
    f.push_back(field<double>("ppo.clip", [](Config& c) -> double& { return c.ppo.clip_ratio; }));
    f.push_back({"ppo.optimizer", [](Config& c, const std::string& v) { c.ppo.optimizer = parse_optimizer(trim(v)); },
                 [](const Config& c) {
                   return std::string(c.ppo.optimizer == OptimizerKind::Adam ? "adam" : "sgd");
                 }});
    f.push_back(field<bool>("ppo.center_rewards", [](Config& c) -> bool& { return c.ppo.center_rewards; }));
    f.push_back(field<double>("ppo.lambda_min", [](Config& c) -> double& { return c.ppo.lambda_min; }));
    f.push_back(field<double>("ppo.kl_stop", [](Config& c) -> double& { return c.ppo.kl_stop; }));
    f.push_back(field<bool>("ppo.stop_at_convergence", [](Config& c) -> bool& { return c.ppo.stop_at_convergence; }));

    f.push_back(field<int>("dqn.replay", [](Config& c) -> int& { return c.dqn.replay_capacity; }));
    f.push_back(field<int>("dqn.batch", [](Config& c) -> int& { return c.dqn.batch_size; }));
    f.push_back(field<double>("dqn.learning_rate", [](Config& c) -> double& { return c.dqn.learning_rate; }));
    f.push_back(field<double>("dqn.epsilon_start", [](Config& c) -> double& { return c.dqn.epsilon_start; }));
    f.push_back(field<double>("dqn.epsilon_end", [](Config& c) -> double& { return c.dqn.epsilon_end; }));
    f.push_back(field<double>("dqn.epsilon_fraction", [](Config& c) -> double& { return c.dqn.epsilon_fraction; }));
    f.push_back(field<int>("dqn.target_sync", [](Config& c) -> int& { return c.dqn.target_sync_updates; }));
    f.push_back(field<int>("dqn.train_every", [](Config& c) -> int& { return c.dqn.train_every_steps; }));
    f.push_back(field<double>("dqn.discount", [](Config& c) -> double& { return c.dqn.discount; }));
    f.push_back(field<Ints>("dqn.hidden", [](Config& c) -> Ints& { return c.dqn.hidden; }));

    f.push_back({"experiment.algorithm",
                 [](Config& c, const std::string& v) { c.experiment.algorithm = parse_algorithm(trim(v)); },
                 [](const Config& c) { return std::string(to_string(c.experiment.algorithm)); }});
    using Seeds = std::vector<std::uint64_t>;
    f.push_back(field<Seeds>("experiment.seeds", [](Config& c) -> Seeds& { return c.experiment.seeds; }));
    f.push_back(field<int>("experiment.iterations", [](Config& c) -> int& { return c.experiment.iterations; }));
    f.push_back(field<std::string>("experiment.out_dir", [](Config& c) -> std::string& { return c.experiment.out_dir; }));
    f.push_back({"experiment.sweep",
                 [](Config& c, const std::string& v) {
                   const auto s = trim(v);
                   if (s != "none" && s != "sinr") fail(ErrorKind::Parse, "expected none or sinr, got '" + s + "'");
                   c.experiment.sweep_sinr = s == "sinr";
                 },
                 [](const Config& c) { return std::string(c.experiment.sweep_sinr ? "sinr" : "none"); }});
    using Vec = std::vector<double>;
    f.push_back(field<Vec>("experiment.sinr_db", [](Config& c) -> Vec& { return c.experiment.sinr_db; }));
    f.push_back(field<int>("experiment.profile_samples", [](Config& c) -> int& { return c.experiment.profile_samples; }));
    f.push_back(field<int>("experiment.oracle_samples", [](Config& c) -> int& { return c.experiment.oracle_samples; }));
    f.push_back(field<std::uint64_t>("experiment.oracle_cap", [](Config& c) -> std::uint64_t& { return c.experiment.oracle_cap; }));
    f.push_back(field<bool>("experiment.record_wall_time", [](Config& c) -> bool& { return c.experiment.record_wall_time; }));
    return f;
  }();
  return fields;
}

const Field* find_field(const std::string& key) {
  for (const auto& f : all_fields())
    if (f.key == key) return &f;
  return nullptr;
}

// Per-user vectors holding a single repeated value follow scenario.users.
void fit_user_vectors(ScenarioConfig& s) {
  if (s.users < 1) return;
  const auto n = static_cast<std::size_t>(s.users);
  for (auto* v : {&s.user_cpu_hz, &s.user_cycles_per_bit, &s.zeta_user}) {
    if (v->empty() || v->size() == n) continue;
    if (std::all_of(v->begin(), v->end(), [&](double x) { return x == v->front(); })) v->assign(n, v->front());
  }
}

std::vector<std::string> experiment_errors(const ExperimentSpec& e) {
  std::vector<std::string> errs;
  if (e.seeds.empty()) errs.emplace_back("experiment.seeds must list at least one seed");
  if (e.iterations < 1) errs.emplace_back("experiment.iterations must be >= 1");
  if (e.out_dir.empty()) errs.emplace_back("experiment.out_dir must not be empty");
  if (e.sinr_db.empty()) errs.emplace_back("experiment.sinr_db must list at least one point");
  if (e.profile_samples < 1) errs.emplace_back("experiment.profile_samples must be >= 1");
  if (e.oracle_samples < 1) errs.emplace_back("experiment.oracle_samples must be >= 1");
  if (e.oracle_cap < 1) errs.emplace_back("experiment.oracle_cap must be >= 1");
  return errs;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), ErrorKind::Io, "cannot open '" + path.string() + "' for writing");
  out << text;
  out.close();
  require(!out.fail(), ErrorKind::Io, "failed writing '" + path.string() + "'");
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorKind::Io, "cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string curve_name(Algorithm a, std::uint64_t seed) {
  return "curve_" + std::string(to_string(a)) + "_seed" + std::to_string(seed) + ".csv";
}

std::string oracle_name(std::uint64_t seed) { return "oracle_seed" + std::to_string(seed) + ".json"; }

SeedSummary summarize(const LearningCurve& curve, std::uint64_t seed) {
  SeedSummary s;
  s.seed = seed;
  s.iterations = static_cast<int>(curve.size());
  if (curve.empty()) return s;
  const auto ma = moving_average(curve);
  s.final_reward = ma.back();
  s.peak_reward = *std::max_element(ma.begin(), ma.end());
  s.convergence_iteration = convergence_iteration(curve).value_or(-1);
  for (const auto& r : curve) {
    s.delay_violations += r.delay_violations;
    s.energy_violations += r.energy_violations;
  }
  return s;
}

nlohmann::json to_json(const SeedSummary& s) {
  return {{"seed", s.seed},
          {"final_reward", s.final_reward},
          {"peak_reward", s.peak_reward},
          {"convergence_iteration", s.convergence_iteration},
          {"delay_violations", s.delay_violations},
          {"energy_violations", s.energy_violations},
          {"iterations", s.iterations}};
}

SeedSummary seed_summary_from_json(const nlohmann::json& j) {
  SeedSummary s;
  s.seed = j.at("seed").get<std::uint64_t>();
  s.final_reward = j.at("final_reward").get<double>();
  s.peak_reward = j.at("peak_reward").get<double>();
  s.convergence_iteration = j.at("convergence_iteration").get<int>();
  s.delay_violations = j.at("delay_violations").get<long>();
  s.energy_violations = j.at("energy_violations").get<long>();
  s.iterations = j.at("iterations").get<int>();
  return s;
}

// One greedy episode on the evaluation stream, for the trace export.
std::vector<StepOutcome> greedy_episode(Environment& env, const std::function<int(const EpisodeState&)>& act,
                                        std::uint64_t seed) {
  auto channel_rng = make_stream(seed, Stream::Evaluation, 1);
  auto semantic_rng = make_stream(seed, Stream::Evaluation, 2);
  std::vector<StepOutcome> steps;
  EpisodeState state = env.reset(channel_rng);
  for (int t = 0; t < env.config().users; ++t) {
    steps.push_back(env.step(state, act(state), semantic_rng));
    state = steps.back().next;
  }
  return steps;
}

}  // namespace

Config parse_config(const std::string& text, const std::string& source) {
  Config cfg;
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  auto where = [&] { return source + ":" + std::to_string(lineno) + ": "; };
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) fail(ErrorKind::Parse, where() + "expected 'key = value'");
    const auto key = trim(std::string_view(body).substr(0, eq));
    const auto value = trim(std::string_view(body).substr(eq + 1));
    if (key.empty()) fail(ErrorKind::Parse, where() + "missing key before '='");
    if (!seen.insert(key).second) fail(ErrorKind::Parse, where() + "duplicate key '" + key + "'");
    try {
      if (key == "config.version") {
        const int v = parse_number<int>(value);
        if (v != kConfigVersion)
          fail(ErrorKind::Parse, "unsupported version " + std::to_string(v) + " (expected " +
                                     std::to_string(kConfigVersion) + ")");
        continue;
      }
      const Field* f = find_field(key);
      if (!f) fail(ErrorKind::Parse, "unknown key");
      f->set(cfg, value);
    } catch (const Error& e) {
      fail(ErrorKind::Parse, where() + key + ": " + e.what());
    }
  }
  for (const char* req : {"config.version", "scenario.users", "scenario.rbs"})
    if (!seen.count(req)) fail(ErrorKind::Parse, source + ": missing required key '" + std::string(req) + "'");
  fit_user_vectors(cfg.scenario);
  validate(cfg);
  return cfg;
}

Config load_config(const fs::path& path) {
  require(fs::exists(path), ErrorKind::Io, "config file '" + path.string() + "' does not exist");
  return parse_config(read_text(path), path.string());
}

std::string serialize_config(const Config& cfg) {
  std::string out = "config.version = " + std::to_string(kConfigVersion) + "\n";
  std::string section = "config";
  for (const auto& f : all_fields()) {
    const auto sec = f.key.substr(0, f.key.find('.'));
    if (sec != section) out += "\n";
    section = sec;
    out += f.key + " = " + f.get(cfg) + "\n";
  }
  return out;
}

void set_config_value(Config& cfg, const std::string& key, const std::string& value) {
  const Field* f = find_field(trim(key));
  require(f != nullptr, ErrorKind::Parse, "unknown key '" + key + "'");
  try {
    f->set(cfg, value);
  } catch (const Error& e) {
    fail(ErrorKind::Parse, key + ": " + e.what());
  }
  fit_user_vectors(cfg.scenario);
}

void validate(const Config& cfg) {
  std::vector<std::string> errs = validation_errors(cfg.scenario);
  for (auto& e : validation_errors(cfg.ppo)) errs.push_back(std::move(e));
  for (auto& e : validation_errors(cfg.dqn)) errs.push_back(std::move(e));
  for (auto& e : experiment_errors(cfg.experiment)) errs.push_back(std::move(e));
  if (errs.empty()) return;
  std::ostringstream os;
  os << "invalid config (" << errs.size() << " problem" << (errs.size() > 1 ? "s" : "") << "):";
  for (const auto& e : errs) os << "\n  - " << e;
  fail(ErrorKind::Validation, os.str());
}

std::string scenario_fingerprint(const ScenarioConfig& scenario) {
  Config c;
  c.scenario = scenario;
  std::string out;
  for (const auto& f : scenario_fields()) out += f.key + "=" + f.get(c) + ";";
  return out;
}

void write_curve_csv(const LearningCurve& curve, const fs::path& path) {
  std::ostringstream os;
  os << kCurveSchema << "\n"
     << "iteration,mean_reward,mean_kl,lambda,delay_violations,energy_violations,wall_ms\n";
  for (const auto& r : curve)
    os << r.iteration << ',' << format_double(r.mean_reward) << ',' << format_double(r.mean_kl) << ','
       << format_double(r.lambda) << ',' << r.delay_violations << ',' << r.energy_violations << ','
       << format_double(r.wall_ms) << '\n';
  write_text(path, os.str());
}

LearningCurve read_curve_csv(const fs::path& path) {
  std::istringstream in(read_text(path));
  std::string line;
  LearningCurve curve;
  bool schema = false, header = false;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (line[0] == '#') {
      schema = schema || trim(line) == kCurveSchema;
      continue;
    }
    if (!header) {
      header = true;
      continue;
    }
    const auto cells = split_list(line);
    if (cells.size() != 7) fail(ErrorKind::Parse, path.string() + ":" + std::to_string(lineno) + ": expected 7 columns");
    CurveRow r;
    r.iteration = parse_number<int>(cells[0]);
    r.mean_reward = parse_number<double>(cells[1]);
    r.mean_kl = parse_number<double>(cells[2]);
    r.lambda = parse_number<double>(cells[3]);
    r.delay_violations = parse_number<int>(cells[4]);
    r.energy_violations = parse_number<int>(cells[5]);
    r.wall_ms = parse_number<double>(cells[6]);
    curve.push_back(r);
  }
  require(schema, ErrorKind::Parse, path.string() + ": missing or unknown schema line");
  return curve;
}

void write_profile_csv(const std::vector<ProfileRow>& rows, const fs::path& path) {
  std::ostringstream os;
  os << kProfileSchema << "\nencoder_k,sinr_db,accuracy\n";
  for (const auto& r : rows)
    os << r.encoder << ',' << format_double(r.sinr_db) << ',' << format_double(r.accuracy) << '\n';
  write_text(path, os.str());
}

void write_trace_csv(const std::vector<StepOutcome>& steps, const fs::path& path) {
  std::ostringstream os;
  os << kTraceSchema << "\nstep,user,encoder_k,rb_q,reward,delay_s,energy_j,delay_ok,energy_ok\n";
  const StepOutcome* terminal = steps.empty() || !steps.back().terminal ? nullptr : &steps.back();
  for (std::size_t t = 0; t < steps.size(); ++t) {
    const auto& a = steps[t].next.assigned.at(t);
    os << t << ',' << t << ',' << a.encoder << ',' << a.rb << ',' << format_double(steps[t].reward);
    if (terminal && t < terminal->users.size()) {
      const auto& u = terminal->users[t];
      os << ',' << format_double(u.cost.total_delay) << ',' << format_double(u.cost.total_energy) << ','
         << (u.feasible.delay_ok ? 1 : 0) << ',' << (u.feasible.energy_ok ? 1 : 0);
    } else {
      os << ",,,,";
    }
    os << '\n';
  }
  write_text(path, os.str());
}

std::vector<ProfileRow> run_profile(const ScenarioConfig& scenario, const ExperimentSpec& spec, std::uint64_t seed) {
  const auto task = SemanticTask::build(scenario);
  std::vector<double> sinr(spec.sinr_db.size());
  std::transform(spec.sinr_db.begin(), spec.sinr_db.end(), sinr.begin(), db_to_linear);
  std::vector<ProfileRow> rows;
  for (int k = 0; k < kEncoderCount; ++k) {
    // Same draws for every encoder, so differences come from the encoders.
    auto rng = make_stream(seed, Stream::Evaluation);
    const auto acc = accuracy_profile(task->prototypes[static_cast<std::size_t>(k)], sinr, spec.profile_samples,
                                      scenario.intra_class_sigma, scenario.kappa, rng);
    for (std::size_t i = 0; i < sinr.size(); ++i) rows.push_back({k, spec.sinr_db[i], acc[i]});
  }
  return rows;
}

OracleResult run_oracle(const Config& cfg, std::uint64_t seed) {
  validate(cfg);
  Environment env(cfg.scenario);
  auto streams = EpisodeStreams::from_seed(seed);
  env.reset(streams.channel);
  const auto eval = make_stream(seed, Stream::Evaluation);
  return oracle_search(env.config(), env.task(), env.channel(), cfg.experiment.oracle_samples, eval,
                       cfg.experiment.oracle_cap);
}

void write_oracle_json(const OracleResult& r, std::uint64_t seed, const fs::path& path) {
  nlohmann::json assignment = nlohmann::json::array();
  for (int i = 0; i < r.best.users(); ++i)
    assignment.push_back({{"user", i}, {"encoder_k", r.best[i].encoder}, {"rb_q", r.best[i].rb}});
  const nlohmann::json j = {{"seed", seed},
                            {"value", r.value.mean},
                            {"std_error", r.value.std_error},
                            {"samples", r.value.samples},
                            {"candidates", r.candidates},
                            {"assignment", assignment}};
  write_text(path, j.dump(2) + "\n");
}

std::vector<SeedSummary> run_experiment(const Config& cfg) {
  validate(cfg);
  const auto& spec = cfg.experiment;
  const fs::path out = spec.out_dir;
  std::error_code ec;
  fs::create_directories(out, ec);
  require(!ec && fs::is_directory(out), ErrorKind::Io, "cannot create output directory '" + out.string() + "'");

  const auto task = SemanticTask::build(cfg.scenario);
  std::vector<SeedSummary> summaries;
  for (const auto seed : spec.seeds) {
    Environment env(cfg.scenario, task);
    const std::string tag = "_seed" + std::to_string(seed);
    switch (spec.algorithm) {
      case Algorithm::Ppo: {
        PpoConfig p = cfg.ppo;
        p.max_iterations = spec.iterations;
        auto result = train(env, p, seed, spec.record_wall_time);
        write_curve_csv(result.curve, out / curve_name(spec.algorithm, seed));
        nn::save_checkpoint(result.policy, (out / ("policy" + tag + ".bin")).string());
        const auto steps = greedy_episode(env, [&](const EpisodeState& s) {
          return nn::forward(result.policy, env.encode_state(s), env.action_mask(s)).argmax();
        }, seed);
        write_trace_csv(steps, out / ("trace_ppo" + tag + ".csv"));
        summaries.push_back(summarize(result.curve, seed));
        break;
      }
      case Algorithm::Dqn: {
        auto result = dqn_train(env, cfg.dqn, spec.iterations, cfg.ppo.trajectories_per_iteration, seed);
        write_curve_csv(result.curve, out / curve_name(spec.algorithm, seed));
        nn::save_checkpoint(result.q_network, (out / ("qnet" + tag + ".bin")).string());
        const auto steps = greedy_episode(env, [&](const EpisodeState& s) {
          return greedy_action(result.q_network, env.encode_state(s), env.action_mask(s));
        }, seed);
        write_trace_csv(steps, out / ("trace_dqn" + tag + ".csv"));
        summaries.push_back(summarize(result.curve, seed));
        break;
      }
      case Algorithm::Random: {
        const auto curve = random_curve(env, spec.iterations, cfg.ppo.trajectories_per_iteration, seed);
        write_curve_csv(curve, out / curve_name(spec.algorithm, seed));
        summaries.push_back(summarize(curve, seed));
        break;
      }
      case Algorithm::Oracle: {
        const auto r = run_oracle(cfg, seed);
        write_oracle_json(r, seed, out / oracle_name(seed));
        SeedSummary s;
        s.seed = seed;
        s.final_reward = s.peak_reward = r.value.mean;
        auto channel_rng = EpisodeStreams::from_seed(seed).channel;
        env.reset(channel_rng);
        for (int i = 0; i < r.best.users(); ++i) {
          const auto link = user_link(env.config(), env.channel(), i, r.best[i]);
          s.delay_violations += link.feasible.delay_ok ? 0 : 1;
          s.energy_violations += link.feasible.energy_ok ? 0 : 1;
        }
        summaries.push_back(s);
        break;
      }
    }
    if (spec.sweep_sinr) write_profile_csv(run_profile(cfg.scenario, spec, seed), out / ("profile" + tag + ".csv"));
  }

  nlohmann::json seeds = nlohmann::json::array();
  for (const auto& s : summaries) seeds.push_back(to_json(s));
  const nlohmann::json summary = {{"schema", "semcom.summary.v1"},
                                  {"algorithm", to_string(spec.algorithm)},
                                  {"iterations", spec.iterations},
                                  {"scenario", scenario_fingerprint(cfg.scenario)},
                                  {"seeds", seeds}};
  write_text(out / "summary.json", summary.dump(2) + "\n");
  write_text(out / "config.cfg", serialize_config(cfg));
  return summaries;
}

CompareReport compare_runs(const std::vector<fs::path>& run_dirs, const fs::path& out_dir) {
  require(run_dirs.size() >= 2, ErrorKind::Validation, "compare needs at least two run directories");
  CompareReport report;
  std::string fingerprint;
  std::vector<std::vector<LearningCurve>> curves;
  for (const auto& dir : run_dirs) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(read_text(dir / "summary.json"));
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorKind::Parse, (dir / "summary.json").string() + ": " + e.what());
    }
    const auto fp = j.at("scenario").get<std::string>();
    if (fingerprint.empty()) fingerprint = fp;
    require(fp == fingerprint, ErrorKind::Validation,
            "run '" + dir.string() + "' was made on a different scenario than '" + run_dirs.front().string() + "'");
    CompareEntry e;
    e.label = j.at("algorithm").get<std::string>();
    e.directory = dir.string();
    for (const auto& s : j.at("seeds")) e.seeds.push_back(seed_summary_from_json(s));
    require(!e.seeds.empty(), ErrorKind::Parse, dir.string() + ": summary lists no seeds");
    double total = 0.0;
    for (const auto& s : e.seeds) total += s.final_reward;
    e.mean_final = total / static_cast<double>(e.seeds.size());
    std::vector<LearningCurve> run_curves;
    if (e.label == "oracle") {
      e.has_oracle = true;
      e.oracle_value = e.mean_final;
    } else {
      const auto algo = parse_algorithm(e.label);
      for (const auto& s : e.seeds) run_curves.push_back(read_curve_csv(dir / curve_name(algo, s.seed)));
    }
    curves.push_back(std::move(run_curves));
    report.entries.push_back(std::move(e));
  }
  const double ref = report.entries.front().mean_final;
  std::optional<double> oracle;
  for (auto& e : report.entries) {
    e.final_ratio = e.mean_final == ref ? 1.0 : e.mean_final / ref;
    if (e.has_oracle && !oracle) oracle = e.oracle_value;
  }

  std::error_code ec;
  fs::create_directories(out_dir, ec);
  require(!ec && fs::is_directory(out_dir), ErrorKind::Io, "cannot create '" + out_dir.string() + "'");

  std::ostringstream csv;
  csv << kCompareSchema << "\nlabel,directory,seed,final_reward,peak_reward,convergence_iteration,final_ratio,"
      << "gap_to_oracle\n";
  for (const auto& e : report.entries)
    for (const auto& s : e.seeds) {
      csv << e.label << ',' << e.directory << ',' << s.seed << ',' << format_double(s.final_reward) << ','
          << format_double(s.peak_reward) << ',' << s.convergence_iteration << ',' << format_double(e.final_ratio)
          << ',';
      if (oracle) csv << format_double((*oracle - s.final_reward) / std::abs(*oracle));
      csv << '\n';
    }
  write_text(out_dir / "comparison.csv", csv.str());

  // Seed-averaged reward per iteration, one column per run with curves.
  std::ostringstream aligned;
  aligned << kCurveSchema << "\niteration";
  std::size_t length = 0;
  for (std::size_t r = 0; r < curves.size(); ++r) {
    if (curves[r].empty()) continue;
    aligned << ',' << report.entries[r].label << '_' << r;
    for (const auto& c : curves[r]) length = std::max(length, c.size());
  }
  aligned << '\n';
  for (std::size_t it = 0; it < length; ++it) {
    aligned << it + 1;
    for (const auto& run : curves) {
      if (run.empty()) continue;
      double sum = 0.0;
      int n = 0;
      for (const auto& c : run)
        if (it < c.size()) {
          sum += c[it].mean_reward;
          ++n;
        }
      aligned << ',';
      if (n) aligned << format_double(sum / n);
    }
    aligned << '\n';
  }
  write_text(out_dir / "aligned_curves.csv", aligned.str());

  std::ostringstream txt;
  txt << "Comparison of " << report.entries.size() << " runs (reference: " << report.entries.front().label << " in "
      << report.entries.front().directory << ")\n\n";
  for (const auto& e : report.entries) {
    char line[256];
    std::snprintf(line, sizeof line, "%-8s mean final reward %12.4f  ratio %.4f", e.label.c_str(), e.mean_final,
                  e.final_ratio);
    txt << line;
    if (oracle && !e.has_oracle) {
      std::snprintf(line, sizeof line, "  gap to oracle %.2f%%", 100.0 * (*oracle - e.mean_final) / std::abs(*oracle));
      txt << line;
    }
    txt << "\n  convergence iterations:";
    for (const auto& s : e.seeds) txt << ' ' << s.convergence_iteration;
    txt << "\n";
  }
  txt << "\nBaselines: DQN, uniform random and the exhaustive oracle stand in for SAC, which is not implemented.\n"
      << "Final reward is the 20-iteration moving average at the last iteration; convergence is the first\n"
      << "iteration whose moving average reaches 95% of the final one.\n";
  report.text = txt.str();
  write_text(out_dir / "comparison.txt", report.text);
  return report;
}

}  // namespace semcom
