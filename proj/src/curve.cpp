#include "semcom/curve.hpp"

#include <algorithm>
#include <cmath>

namespace semcom {

std::vector<double> moving_average(const LearningCurve& curve, int window) {
  std::vector<double> ma;
  ma.reserve(curve.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < curve.size(); ++i) {
    sum += curve[i].mean_reward;
    if (i >= static_cast<std::size_t>(window)) sum -= curve[i - static_cast<std::size_t>(window)].mean_reward;
    const auto n = std::min<std::size_t>(i + 1, static_cast<std::size_t>(window));
    ma.push_back(sum / static_cast<double>(n));
  }
  return ma;
}

double final_moving_average(const LearningCurve& curve, int window) {
  if (curve.empty()) return 0.0;
  // Recomputed directly so the value does not carry running-sum drift.
  const std::size_t n = std::min<std::size_t>(curve.size(), static_cast<std::size_t>(window));
  double sum = 0.0;
  for (std::size_t i = curve.size() - n; i < curve.size(); ++i) sum += curve[i].mean_reward;
  return sum / static_cast<double>(n);
}

std::optional<int> convergence_iteration(const LearningCurve& curve, double fraction, int window) {
  if (curve.empty()) return std::nullopt;
  const auto ma = moving_average(curve, window);
  const double target = ma.back() - (1.0 - fraction) * std::abs(ma.back());
  for (std::size_t i = 0; i < ma.size(); ++i)
    if (ma[i] >= target) return curve[i].iteration;
  return std::nullopt;
}

bool has_converged(const std::vector<double>& ma, int window, double tolerance) {
  const auto w = static_cast<std::size_t>(window);
  if (ma.size() < 2 * w) return false;
  const double prev = ma[ma.size() - 1 - w];
  const double cur = ma.back();
  return std::abs(cur - prev) <= tolerance * std::max(std::abs(prev), 1e-12);
}

}  // namespace semcom
