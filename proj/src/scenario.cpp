#include "semcom/scenario.hpp"

#include <cmath>
#include <sstream>

#include "semcom/error.hpp"

namespace semcom {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::Domain: return "domain error";
    case ErrorKind::Shape: return "shape error";
    case ErrorKind::Validation: return "validation error";
    case ErrorKind::Parse: return "parse error";
    case ErrorKind::Constraint: return "constraint violation";
    case ErrorKind::Divergence: return "training divergence";
    case ErrorKind::CapExceeded: return "enumeration cap exceeded";
    case ErrorKind::Io: return "I/O error";
  }
  return "error";
}

std::array<EncoderSpec, kEncoderCount> default_encoder_catalog() {
  // Feature widths follow the public ViT-B/32, ViT-B/16 and ViT-L/14 heads;
  // one 32-bit word per coordinate on the air.
  return {{
      {0, "ViT-B/32", 40.0, 512 * 32.0, 512, 0.15},
      {1, "ViT-B/16", 80.0, 512 * 32.0, 512, 0.25},
      {2, "ViT-L/14", 160.0, 768 * 32.0, 768, 0.40},
  }};
}

void ScenarioConfig::broadcast_user_vectors() {
  const auto n = static_cast<std::size_t>(users > 0 ? users : 0);
  for (auto* v : {&user_cpu_hz, &user_cycles_per_bit, &zeta_user}) {
    if (v->size() == 1 && n != 1) v->assign(n, v->front());
  }
}

namespace {

bool positive(double v) { return std::isfinite(v) && v > 0.0; }

}  // namespace

std::vector<std::string> validation_errors(const ScenarioConfig& c) {
  std::vector<std::string> errs;
  auto check = [&](bool ok, const std::string& msg) {
    if (!ok) errs.push_back(msg);
  };
  check(c.users >= 1, "scenario.users must be >= 1");
  check(c.rbs >= 1, "scenario.rbs must be >= 1");
  check(c.rbs >= c.users, "scenario.rbs must be >= scenario.users (one RB per user)");
  check(positive(c.rb_bandwidth_hz), "scenario.rb_bandwidth_hz must be positive");
  check(positive(c.bs_power_w), "scenario.bs_power_w must be positive");
  check(positive(c.noise_w_per_hz), "scenario.noise_w_per_mhz must be positive");
  check(positive(c.interference_min_w), "scenario.interference_min_w must be positive");
  check(positive(c.interference_max_w), "scenario.interference_max_w must be positive");
  check(c.interference_min_w <= c.interference_max_w,
        "scenario.interference_min_w must not exceed scenario.interference_max_w");
  check(positive(c.cell_radius_m), "scenario.cell_radius_m must be positive");
  check(positive(c.bs_cpu_hz), "compute.bs_cpu_hz must be positive");
  check(positive(c.bs_cycles_per_bit), "compute.bs_cycles_per_bit must be positive");
  const auto n = static_cast<std::size_t>(c.users > 0 ? c.users : 0);
  auto per_user = [&](const std::vector<double>& v, const char* key) {
    check(v.size() == n, std::string(key) + " must have one entry per user (or a single value)");
    for (double x : v) {
      if (!positive(x)) {
        errs.push_back(std::string(key) + " entries must be positive");
        break;
      }
    }
  };
  per_user(c.user_cpu_hz, "compute.user_cpu_hz");
  per_user(c.user_cycles_per_bit, "compute.user_cycles_per_bit");
  per_user(c.zeta_user, "compute.zeta_user");
  check(positive(c.zeta_bs), "compute.zeta_bs must be positive");
  check(positive(c.image_bits), "compute.image_bits must be positive");
  check(positive(c.decoder_bits), "compute.decoder_bits must be positive");
  check(positive(c.delay_cap_s), "limits.delay_s must be positive");
  check(positive(c.energy_cap_j), "limits.energy_j must be positive");
  check(positive(c.lambda_delay), "limits.lambda_delay must be positive");
  check(positive(c.lambda_energy), "limits.lambda_energy must be positive");
  check(c.classes >= 2, "semantic.classes must be >= 2");
  check(positive(c.kappa), "semantic.kappa must be positive");
  check(positive(c.similarity_temperature), "semantic.temperature must be positive");
  check(positive(c.intra_class_sigma), "semantic.intra_sigma must be positive");
  for (int k = 0; k < kEncoderCount; ++k) {
    const auto& e = c.encoders[static_cast<std::size_t>(k)];
    const std::string p = "encoder." + std::to_string(k) + ".";
    check(e.index == k, p + "index must equal its catalog position");
    check(positive(e.model_bits), p + "model_bits must be positive");
    check(positive(e.output_bits), p + "output_bits must be positive");
    check(e.feature_dim > c.classes, p + "feature_dim must exceed semantic.classes");
    check(positive(e.margin) && e.margin < 1.0, p + "margin must lie in (0, 1)");
    if (k > 0) {
      const auto& prev = c.encoders[static_cast<std::size_t>(k - 1)];
      check(e.model_bits > prev.model_bits, p + "model_bits must strictly increase with k");
      check(e.margin > prev.margin, p + "margin must strictly increase with k");
    }
  }
  return errs;
}

void validate(const ScenarioConfig& cfg) {
  auto errs = validation_errors(cfg);
  if (errs.empty()) return;
  std::ostringstream os;
  os << "invalid scenario (" << errs.size() << " problem" << (errs.size() > 1 ? "s" : "") << "):";
  for (const auto& e : errs) os << "\n  - " << e;
  fail(ErrorKind::Validation, os.str());
}

}  // namespace semcom
