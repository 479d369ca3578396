#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace semcom {

inline constexpr int kEncoderCount = 3;

/// One selectable semantic encoder. Sizes are in bits; the defaults are scaled
/// so the delay and energy terms land in the same range as the caps.
struct EncoderSpec {
  int index = 0;
  std::string name;
  double model_bits = 0.0;   // D_M(k)
  double output_bits = 0.0;  // D_O(k), payload sent over the air
  int feature_dim = 0;       // n_f(k)
  double margin = 0.0;       // m(k), 1 - max pairwise prototype cosine

  bool operator==(const EncoderSpec&) const = default;
};

std::array<EncoderSpec, kEncoderCount> default_encoder_catalog();

/// Physical, cost and penalty parameters of one cell.
///
/// Units are SI throughout. `noise_w_per_hz` is the noise spectral density in
/// W/Hz; the config file takes it in W/MHz and converts on ingestion
/// (4e-15 W/MHz -> 4e-21 W/Hz, so W * N0 = 8e-14 W at 20 MHz).
struct ScenarioConfig {
  int users = 5;
  int rbs = 10;
  double rb_bandwidth_hz = 20e6;
  double bs_power_w = 0.2;
  double noise_w_per_hz = 4e-21;
  double interference_min_w = 1e-9;
  double interference_max_w = 1.0;
  double cell_radius_m = 500.0;

  double bs_cpu_hz = 3.0e9;
  double bs_cycles_per_bit = 750.0;
  std::vector<double> user_cpu_hz = std::vector<double>(5, 1.5e9);
  std::vector<double> user_cycles_per_bit = std::vector<double>(5, 0.2);
  std::vector<double> zeta_user = std::vector<double>(5, 1e-27);
  double zeta_bs = 1e-27;
  double image_bits = 1000.0;   // D_X
  double decoder_bits = 1e4;    // D_E

  double delay_cap_s = 0.2;
  double energy_cap_j = 20.0;
  double lambda_delay = 1.0;
  double lambda_energy = 1.0;

  int classes = 10;
  double kappa = 0.5;                    // feature-noise coupling
  double similarity_temperature = 10.0;  // tau_s
  double intra_class_sigma = 0.02;
  std::uint64_t prototype_seed = 20240601;

  std::array<EncoderSpec, kEncoderCount> encoders = default_encoder_catalog();

  bool fixed_channel = false;
  std::uint64_t channel_seed = 1;

  bool operator==(const ScenarioConfig&) const = default;

  /// Resizes per-user vectors that were given as a single broadcast value.
  void broadcast_user_vectors();
};

/// All violated invariants, one message per entry. Empty means valid.
std::vector<std::string> validation_errors(const ScenarioConfig& cfg);

/// Throws Error(Validation) listing every violation.
void validate(const ScenarioConfig& cfg);

}  // namespace semcom
