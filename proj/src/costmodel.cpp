#include "semcom/costmodel.hpp"

#include <cmath>
#include <limits>

#include "semcom/error.hpp"

namespace semcom {

namespace {

const double& per_user(const std::vector<double>& v, int user, const char* what) {
  require(user >= 0 && static_cast<std::size_t>(user) < v.size(), ErrorKind::Shape,
          std::string(what) + ": user index out of range");
  return v[static_cast<std::size_t>(user)];
}

}  // namespace

double extraction_delay(const ScenarioConfig& cfg, const EncoderSpec& encoder) {
  require(cfg.bs_cpu_hz > 0.0, ErrorKind::Domain, "extraction_delay: BS CPU frequency must be > 0");
  return cfg.bs_cycles_per_bit * cfg.image_bits * encoder.model_bits / cfg.bs_cpu_hz;
}

double transmission_delay(const ScenarioConfig&, const EncoderSpec& encoder, double rate_bps) {
  require(!std::isnan(rate_bps) && rate_bps >= 0.0, ErrorKind::Domain, "transmission_delay: rate must be >= 0");
  if (rate_bps == 0.0) return std::numeric_limits<double>::infinity();
  return encoder.output_bits / rate_bps;
}

double user_compute_delay(const ScenarioConfig& cfg, const EncoderSpec& encoder, int user) {
  const double f = per_user(cfg.user_cpu_hz, user, "user_compute_delay");
  require(f > 0.0, ErrorKind::Domain, "user_compute_delay: user CPU frequency must be > 0");
  return per_user(cfg.user_cycles_per_bit, user, "user_compute_delay") * encoder.output_bits * cfg.decoder_bits / f;
}

double total_delay(double extraction, double transmission, double user_compute) {
  return extraction + transmission + user_compute;
}

double bs_energy(const ScenarioConfig& cfg, const EncoderSpec& encoder, double transmission_delay_s) {
  return cfg.zeta_bs * cfg.bs_cpu_hz * cfg.bs_cpu_hz * cfg.image_bits * encoder.model_bits +
         cfg.bs_power_w * transmission_delay_s;
}

double user_energy(const ScenarioConfig& cfg, const EncoderSpec& encoder, int user) {
  const double f = per_user(cfg.user_cpu_hz, user, "user_energy");
  return per_user(cfg.zeta_user, user, "user_energy") * f * f * encoder.output_bits * cfg.decoder_bits;
}

CostBreakdown cost_breakdown(const ScenarioConfig& cfg, const EncoderSpec& encoder, int user, double rate_bps) {
  CostBreakdown c;
  c.extraction_delay = extraction_delay(cfg, encoder);
  c.transmission_delay = transmission_delay(cfg, encoder, rate_bps);
  c.user_compute_delay = user_compute_delay(cfg, encoder, user);
  c.total_delay = total_delay(c.extraction_delay, c.transmission_delay, c.user_compute_delay);
  c.bs_energy = bs_energy(cfg, encoder, c.transmission_delay);
  c.user_energy = user_energy(cfg, encoder, user);
  c.total_energy = c.bs_energy + c.user_energy;
  return c;
}

Feasibility feasibility(const CostBreakdown& cost, const ScenarioConfig& cfg) {
  return {cost.total_delay <= cfg.delay_cap_s, cost.total_energy <= cfg.energy_cap_j};
}

}  // namespace semcom
