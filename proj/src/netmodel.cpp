#include "semcom/netmodel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "semcom/error.hpp"

namespace semcom {

void validate(const ChannelState& ch) {
  require(ch.distance.size() == ch.fading.size() && ch.positions.size() == ch.distance.size(), ErrorKind::Shape,
          "channel state: per-user vectors differ in length");
  for (double d : ch.distance) require(std::isfinite(d) && d > 0.0, ErrorKind::Domain, "channel state: distance must be > 0");
  for (double g : ch.fading) require(std::isfinite(g) && g > 0.0, ErrorKind::Domain, "channel state: fading must be > 0");
  for (double i : ch.interference)
    require(std::isfinite(i) && i >= 0.0, ErrorKind::Domain, "channel state: interference must be >= 0");
}

RBAllocation::RBAllocation(int users, int rbs, std::vector<std::uint8_t> entries)
    : users_(users), rbs_(rbs), entries_(std::move(entries)) {
  require(users >= 0 && rbs >= 0, ErrorKind::Shape, "allocation: negative dimensions");
  require(entries_.size() == static_cast<std::size_t>(users) * static_cast<std::size_t>(rbs), ErrorKind::Shape,
          "allocation: entry count does not match users x rbs");
  std::vector<int> per_rb(static_cast<std::size_t>(rbs), 0);
  for (int i = 0; i < users; ++i) {
    int per_user = 0;
    for (int q = 0; q < rbs; ++q) {
      const auto v = at(i, q);
      require(v <= 1, ErrorKind::Constraint, "allocation: entries must be 0 or 1");
      per_user += v;
      per_rb[static_cast<std::size_t>(q)] += v;
    }
    require(per_user <= 1, ErrorKind::Constraint,
            "allocation: user " + std::to_string(i) + " holds more than one RB");
  }
  for (int q = 0; q < rbs; ++q)
    require(per_rb[static_cast<std::size_t>(q)] <= 1, ErrorKind::Constraint,
            "allocation: RB " + std::to_string(q) + " is shared by several users");
}

RBAllocation RBAllocation::from_assignment(int rbs, std::span<const int> rb_of_user) {
  const int users = static_cast<int>(rb_of_user.size());
  std::vector<std::uint8_t> e(static_cast<std::size_t>(users) * static_cast<std::size_t>(rbs), 0);
  for (int i = 0; i < users; ++i) {
    const int q = rb_of_user[static_cast<std::size_t>(i)];
    if (q < 0) continue;
    require(q < rbs, ErrorKind::Constraint, "allocation: RB index out of range");
    e[static_cast<std::size_t>(i * rbs + q)] = 1;
  }
  return RBAllocation(users, rbs, std::move(e));
}

std::span<const std::uint8_t> RBAllocation::row(int user) const {
  require(user >= 0 && user < users_, ErrorKind::Shape, "allocation: user index out of range");
  return std::span<const std::uint8_t>(entries_).subspan(static_cast<std::size_t>(user * rbs_),
                                                         static_cast<std::size_t>(rbs_));
}

double channel_gain(double distance_m, double fading) {
  require(std::isfinite(distance_m) && distance_m > 0.0, ErrorKind::Domain, "channel_gain: distance must be > 0");
  require(std::isfinite(fading) && fading > 0.0, ErrorKind::Domain, "channel_gain: fading must be > 0");
  return fading / (distance_m * distance_m);
}

double sinr(const ScenarioConfig& cfg, const ChannelState& channel, int user, int rb) {
  const auto i = static_cast<std::size_t>(user);
  const auto q = static_cast<std::size_t>(rb);
  require(i < channel.distance.size() && q < channel.interference.size(), ErrorKind::Shape,
          "sinr: user or RB index out of range");
  const double gain = channel_gain(channel.distance[i], channel.fading[i]);
  return cfg.bs_power_w * gain / (channel.interference[q] + cfg.rb_bandwidth_hz * cfg.noise_w_per_hz);
}

double transmission_rate(std::span<const std::uint8_t> alloc_row, const ChannelState& channel,
                         const ScenarioConfig& cfg, int user) {
  require(alloc_row.size() == channel.interference.size(), ErrorKind::Shape,
          "transmission_rate: allocation row length differs from RB count");
  double rate = 0.0;
  for (std::size_t q = 0; q < alloc_row.size(); ++q) {
    require(alloc_row[q] <= 1, ErrorKind::Constraint, "transmission_rate: allocation entries must be 0 or 1");
    if (alloc_row[q] == 0) continue;
    rate += cfg.rb_bandwidth_hz * std::log2(1.0 + sinr(cfg, channel, user, static_cast<int>(q)));
  }
  return rate;
}

ChannelState sample_channel(const ScenarioConfig& cfg, Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::exponential_distribution<double> fading(1.0);
  ChannelState ch;
  const auto u = static_cast<std::size_t>(cfg.users);
  ch.positions.resize(u);
  ch.distance.resize(u);
  ch.fading.resize(u);
  for (std::size_t i = 0; i < u; ++i) {
    // 1 - U[0,1) lies in (0, 1], so the distance is never zero.
    const double d = cfg.cell_radius_m * (1.0 - unit(rng));
    const double bearing = 2.0 * std::numbers::pi * unit(rng);
    ch.distance[i] = d;
    ch.positions[i] = {d * std::cos(bearing), d * std::sin(bearing)};
    double g = 0.0;
    while (g <= 0.0) g = fading(rng);
    ch.fading[i] = g;
  }
  const double lo = std::log(cfg.interference_min_w);
  const double hi = std::log(cfg.interference_max_w);
  ch.interference.resize(static_cast<std::size_t>(cfg.rbs));
  for (auto& iq : ch.interference) {
    iq = std::clamp(std::exp(lo + (hi - lo) * unit(rng)), cfg.interference_min_w, cfg.interference_max_w);
  }
  return ch;
}

}  // namespace semcom
