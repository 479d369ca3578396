#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <memory>
#include <span>
#include <vector>

#include "semcom/rng.hpp"
#include "semcom/scenario.hpp"

namespace semcom {

using Feature = Eigen::VectorXd;

/// Unit-norm class prototypes for one encoder, playing the role of the text
/// feature vectors the receiver compares against. Every pair has cosine
/// similarity at most 1 - margin.
class PrototypeSet {
 public:
  /// Validates norms (1 +- 1e-9) and the pairwise similarity bound.
  PrototypeSet(std::vector<Feature> prototypes, double margin);

  /// Prototypes sqrt(1-m) c + sqrt(m) u_n with c, u_1..u_N orthonormal, so
  /// every pairwise cosine is exactly 1 - m.
  static PrototypeSet build(const EncoderSpec& encoder, int classes, Rng& rng);

  int classes() const { return static_cast<int>(prototypes_.size()); }
  int dim() const { return static_cast<int>(prototypes_.front().size()); }
  double margin() const { return margin_; }
  const Feature& operator[](int c) const { return prototypes_[static_cast<std::size_t>(c)]; }

 private:
  std::vector<Feature> prototypes_;
  double margin_;
};

/// Prototype sets for the full encoder catalog, built once per scenario.
struct SemanticTask {
  std::array<PrototypeSet, kEncoderCount> prototypes;
  double intra_class_sigma;
  double kappa;
  double temperature;

  static std::shared_ptr<const SemanticTask> build(const ScenarioConfig& cfg);
};

/// Prototype of class `label` plus isotropic jitter, renormalised to unit norm.
Feature encode(const PrototypeSet& prototypes, int label, double intra_sigma, Rng& rng);

/// Adds N(0, kappa / sinr) per coordinate. sinr may be +inf (no noise).
Feature channel_perturb(const Feature& feature, double sinr, double kappa, Rng& rng);

double cosine_similarity(const Feature& a, const Feature& b);

std::vector<double> similarities(const Feature& feature, const PrototypeSet& prototypes);

/// Argmax of cosine similarity, lowest index on ties.
int classify(const Feature& feature, const PrototypeSet& prototypes);

/// softmax(temperature * similarities).
std::vector<double> class_probabilities(const Feature& feature, const PrototypeSet& prototypes,
                                        double temperature);

/// log of class_probabilities, computed with log-sum-exp so it never underflows.
std::vector<double> class_log_probabilities(const Feature& feature, const PrototypeSet& prototypes,
                                            double temperature);

/// Monte Carlo classification accuracy after channel noise, one entry per SINR
/// (linear scale, +inf allowed). Labels drawn uniformly.
std::vector<double> accuracy_profile(const PrototypeSet& prototypes, std::span<const double> sinr_linear,
                                     int samples, double intra_sigma, double kappa, Rng& rng);

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

}  // namespace semcom
