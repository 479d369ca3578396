#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "semcom/costmodel.hpp"
#include "semcom/error.hpp"

using namespace semcom;

namespace {

ScenarioConfig one_user() {
  ScenarioConfig cfg;
  cfg.users = 1;
  cfg.user_cpu_hz = {1e9};
  cfg.user_cycles_per_bit = {500};
  cfg.zeta_user = {1e-27};
  return cfg;
}

EncoderSpec enc(double model_bits, double output_bits) {
  EncoderSpec e;
  e.model_bits = model_bits;
  e.output_bits = output_bits;
  return e;
}

}  // namespace

TEST_CASE("extraction delay") {
  auto cfg = one_user();
  cfg.bs_cycles_per_bit = 500;
  cfg.image_bits = 100;
  cfg.bs_cpu_hz = 2.5e9;
  CHECK(extraction_delay(cfg, enc(10, 1)) == doctest::Approx(2.0e-4).epsilon(1e-12));
  cfg.image_bits = 0;
  CHECK(extraction_delay(cfg, enc(10, 1)) == 0.0);
  cfg.bs_cpu_hz = 0;
  CHECK_THROWS_AS(extraction_delay(cfg, enc(10, 1)), Error);
}

TEST_CASE("transmission delay") {
  auto cfg = one_user();
  CHECK(transmission_delay(cfg, enc(1, 4096), 2.0e7) == doctest::Approx(2.048e-4).epsilon(1e-12));
  CHECK(std::isinf(transmission_delay(cfg, enc(1, 4096), 0.0)));
  CHECK(transmission_delay(cfg, enc(1, 4096), 4.0e7) == transmission_delay(cfg, enc(1, 4096), 2.0e7) / 2);
  CHECK_THROWS_AS(transmission_delay(cfg, enc(1, 4096), -1.0), Error);
}

TEST_CASE("user compute delay") {
  auto cfg = one_user();
  cfg.decoder_bits = 100;
  CHECK(user_compute_delay(cfg, enc(1, 512), 0) == doctest::Approx(2.56e-2).epsilon(1e-12));
  CHECK(user_compute_delay(cfg, enc(1, 1024), 0) == doctest::Approx(2 * 2.56e-2).epsilon(1e-12));
  cfg.decoder_bits = 0;
  CHECK(user_compute_delay(cfg, enc(1, 512), 0) == 0.0);
  cfg.user_cpu_hz = {0.0};
  CHECK_THROWS_AS(user_compute_delay(cfg, enc(1, 512), 0), Error);
}

TEST_CASE("total delay composes the parts") {
  CHECK(total_delay(0.1, 0.1, 0.1) == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(std::isinf(total_delay(0.1, INFINITY, 0.1)));
  CHECK(total_delay(2.0e-4, 2.048e-4, 2.56e-2) == doctest::Approx(2.0e-4 + 2.048e-4 + 2.56e-2).epsilon(1e-12));
}

TEST_CASE("BS energy") {
  auto cfg = one_user();
  cfg.zeta_bs = 1e-27;
  cfg.bs_cpu_hz = 3e9;
  cfg.image_bits = 100;
  cfg.bs_power_w = 0.2;
  CHECK(bs_energy(cfg, enc(10, 1), 0.5) == doctest::Approx(0.100009).epsilon(1e-12));
  CHECK(bs_energy(cfg, enc(10, 1), 0.6) > bs_energy(cfg, enc(10, 1), 0.5));
  cfg.image_bits = 0;
  CHECK(bs_energy(cfg, enc(10, 1), 0.0) == 0.0);
}

TEST_CASE("user energy") {
  auto cfg = one_user();
  cfg.decoder_bits = 100;
  CHECK(user_energy(cfg, enc(1, 512), 0) == doctest::Approx(1e-27 * 1e18 * 512 * 100).epsilon(1e-12));
  CHECK(user_energy(cfg, enc(1, 512), 0) == doctest::Approx(5.12e-5).epsilon(1e-12));
  const double base = user_energy(cfg, enc(1, 512), 0);
  cfg.user_cpu_hz = {2e9};
  CHECK(user_energy(cfg, enc(1, 512), 0) == doctest::Approx(4 * base).epsilon(1e-14));
  CHECK(user_energy(cfg, enc(1, 0), 0) == 0.0);
}

TEST_CASE("feasibility uses closed inequalities") {
  ScenarioConfig cfg;
  CHECK(cfg.delay_cap_s == 0.2);
  CHECK(cfg.energy_cap_j == 20.0);
  CostBreakdown c;
  c.total_delay = cfg.delay_cap_s;
  c.total_energy = cfg.energy_cap_j;
  CHECK(feasibility(c, cfg).delay_ok);
  CHECK(feasibility(c, cfg).energy_ok);
  c.total_energy = std::nextafter(cfg.energy_cap_j, INFINITY);
  CHECK_FALSE(feasibility(c, cfg).energy_ok);
  c.total_delay = INFINITY;
  CHECK_FALSE(feasibility(c, cfg).delay_ok);
}

TEST_CASE("breakdown totals equal their parts and feasibility is monotone") {
  ScenarioConfig cfg;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> rate(1e3, 1e9);
  for (int t = 0; t < 200; ++t) {
    const auto& e = cfg.encoders[static_cast<std::size_t>(t % 3)];
    const auto c = cost_breakdown(cfg, e, t % cfg.users, rate(rng));
    CHECK(c.total_delay == c.extraction_delay + c.transmission_delay + c.user_compute_delay);
    CHECK(c.total_energy == c.bs_energy + c.user_energy);
    CHECK(c.extraction_delay >= 0);
    CHECK(c.bs_energy >= 0);
    if (feasibility(c, cfg).ok()) {
      auto smaller = c;
      smaller.total_delay *= 0.9;
      smaller.total_energy *= 0.9;
      CHECK(feasibility(smaller, cfg).ok());
    }
  }
}
