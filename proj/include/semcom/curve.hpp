#pragma once

#include <optional>
#include <vector>

namespace semcom {

/// One row per training iteration; shared by every algorithm.
struct CurveRow {
  int iteration = 0;
  double mean_reward = 0.0;
  double mean_kl = 0.0;
  double lambda = 0.0;
  int delay_violations = 0;
  int energy_violations = 0;
  double wall_ms = 0.0;

  bool operator==(const CurveRow&) const = default;
};

using LearningCurve = std::vector<CurveRow>;

inline constexpr int kMovingAverageWindow = 20;

/// Trailing moving average of mean_reward (shorter window at the start).
std::vector<double> moving_average(const LearningCurve& curve, int window = kMovingAverageWindow);

/// Moving average at the last iteration.
double final_moving_average(const LearningCurve& curve, int window = kMovingAverageWindow);

/// First iteration whose moving average comes within `fraction` of the final
/// moving average: ma >= final - (1 - fraction) * |final|. For positive
/// rewards this is ma >= fraction * final.
std::optional<int> convergence_iteration(const LearningCurve& curve, double fraction = 0.95,
                                         int window = kMovingAverageWindow);

/// Relative change of the moving average over one window below `tolerance`.
bool has_converged(const std::vector<double>& moving_avg, int window = kMovingAverageWindow,
                   double tolerance = 1e-3);

}  // namespace semcom
