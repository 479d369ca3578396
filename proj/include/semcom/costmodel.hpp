#pragma once

#include "semcom/scenario.hpp"

namespace semcom {

struct CostBreakdown {
  double extraction_delay = 0.0;     // l_B
  double transmission_delay = 0.0;   // l_T, +inf when the rate is zero
  double user_compute_delay = 0.0;   // l_L
  double total_delay = 0.0;
  double bs_energy = 0.0;            // e_B
  double user_energy = 0.0;          // e_L
  double total_energy = 0.0;
};

struct Feasibility {
  bool delay_ok = false;
  bool energy_ok = false;
  bool ok() const { return delay_ok && energy_ok; }
};

double extraction_delay(const ScenarioConfig& cfg, const EncoderSpec& encoder);
double transmission_delay(const ScenarioConfig& cfg, const EncoderSpec& encoder, double rate_bps);
double user_compute_delay(const ScenarioConfig& cfg, const EncoderSpec& encoder, int user);
double total_delay(double extraction, double transmission, double user_compute);
double bs_energy(const ScenarioConfig& cfg, const EncoderSpec& encoder, double transmission_delay_s);
double user_energy(const ScenarioConfig& cfg, const EncoderSpec& encoder, int user);

CostBreakdown cost_breakdown(const ScenarioConfig& cfg, const EncoderSpec& encoder, int user,
                             double rate_bps);

/// Closed inequalities: total_delay <= D and total_energy <= E.
Feasibility feasibility(const CostBreakdown& cost, const ScenarioConfig& cfg);

}  // namespace semcom
