#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "semcom/rng.hpp"
#include "semcom/scenario.hpp"

namespace semcom {

/// Per-episode channel realization. Distances are derived from positions.
struct ChannelState {
  std::vector<std::array<double, 2>> positions;  // metres, BS at the origin
  std::vector<double> distance;                  // d_i > 0
  std::vector<double> fading;                    // gamma_i > 0
  std::vector<double> interference;              // I_q >= 0, one per RB

  bool operator==(const ChannelState&) const = default;
};

void validate(const ChannelState& channel);

/// Binary user x RB allocation honouring: entries in {0,1}, at most one RB per
/// user, at most one user per RB. Construction rejects anything else.
class RBAllocation {
 public:
  RBAllocation(int users, int rbs, std::vector<std::uint8_t> entries);

  /// rb_of_user[i] in [0, rbs) or -1 for "no RB".
  static RBAllocation from_assignment(int rbs, std::span<const int> rb_of_user);

  int users() const { return users_; }
  int rbs() const { return rbs_; }
  std::span<const std::uint8_t> row(int user) const;
  std::uint8_t at(int user, int rb) const { return entries_[static_cast<std::size_t>(user * rbs_ + rb)]; }

 private:
  int users_;
  int rbs_;
  std::vector<std::uint8_t> entries_;
};

/// gamma / d^2 with path-loss exponent fixed at 2.
double channel_gain(double distance_m, double fading);

/// P * phi_i / (I_q + W * N0).
double sinr(const ScenarioConfig& cfg, const ChannelState& channel, int user, int rb);

/// Sum over assigned RBs of W * log2(1 + SINR). Zero when the row is empty.
double transmission_rate(std::span<const std::uint8_t> alloc_row, const ChannelState& channel,
                         const ScenarioConfig& cfg, int user);

/// Users uniform in distance over (0, radius] with uniform bearing; fading is
/// unit-mean exponential; interference log-uniform over [I_min, I_max].
ChannelState sample_channel(const ScenarioConfig& cfg, Rng& rng);

}  // namespace semcom
