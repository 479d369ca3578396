#include "semcom/semtask.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "semcom/error.hpp"

namespace semcom {

namespace {

constexpr double kNormTolerance = 1e-9;

Feature gaussian(int dim, double sigma, Rng& rng) {
  std::normal_distribution<double> n(0.0, sigma);
  Feature v(dim);
  for (int i = 0; i < dim; ++i) v[i] = n(rng);
  return v;
}

}  // namespace

PrototypeSet::PrototypeSet(std::vector<Feature> prototypes, double margin)
    : prototypes_(std::move(prototypes)), margin_(margin) {
  require(prototypes_.size() >= 2, ErrorKind::Validation, "prototype set needs at least two classes");
  require(margin > 0.0 && margin < 1.0, ErrorKind::Validation, "prototype margin must lie in (0, 1)");
  const auto dim = prototypes_.front().size();
  for (std::size_t a = 0; a < prototypes_.size(); ++a) {
    const auto& p = prototypes_[a];
    require(p.size() == dim && dim > 0, ErrorKind::Shape, "prototype dimensions differ");
    require(std::abs(p.norm() - 1.0) <= kNormTolerance, ErrorKind::Validation,
            "prototype " + std::to_string(a) + " is not unit norm");
    for (std::size_t b = 0; b < a; ++b) {
      const double cos = p.dot(prototypes_[b]);
      require(cos <= 1.0 - margin + kNormTolerance, ErrorKind::Validation,
              "prototypes " + std::to_string(b) + " and " + std::to_string(a) +
                  " are closer than the margin allows");
    }
  }
}

PrototypeSet PrototypeSet::build(const EncoderSpec& encoder, int classes, Rng& rng) {
  require(classes >= 2, ErrorKind::Validation, "prototype set needs at least two classes");
  require(encoder.feature_dim > classes, ErrorKind::Validation,
          "feature dimension must exceed the class count");
  const int dim = encoder.feature_dim;
  Eigen::MatrixXd g(dim, classes + 1);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int c = 0; c < classes + 1; ++c)
    for (int r = 0; r < dim; ++r) g(r, c) = n(rng);
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  const Eigen::MatrixXd basis = qr.householderQ() * Eigen::MatrixXd::Identity(dim, classes + 1);

  const double shared = std::sqrt(1.0 - encoder.margin);
  const double own = std::sqrt(encoder.margin);
  std::vector<Feature> protos;
  protos.reserve(static_cast<std::size_t>(classes));
  for (int c = 0; c < classes; ++c) {
    Feature p = shared * basis.col(0) + own * basis.col(c + 1);
    p /= p.norm();
    protos.push_back(std::move(p));
  }
  return PrototypeSet(std::move(protos), encoder.margin);
}

std::shared_ptr<const SemanticTask> SemanticTask::build(const ScenarioConfig& cfg) {
  auto make = [&](int k) {
    auto rng = make_stream(cfg.prototype_seed, Stream::Prototypes, static_cast<std::uint64_t>(k));
    return PrototypeSet::build(cfg.encoders[static_cast<std::size_t>(k)], cfg.classes, rng);
  };
  return std::make_shared<const SemanticTask>(SemanticTask{
      {make(0), make(1), make(2)}, cfg.intra_class_sigma, cfg.kappa, cfg.similarity_temperature});
}

Feature encode(const PrototypeSet& prototypes, int label, double intra_sigma, Rng& rng) {
  require(label >= 0 && label < prototypes.classes(), ErrorKind::Domain, "encode: class index out of range");
  require(intra_sigma >= 0.0, ErrorKind::Domain, "encode: jitter must be >= 0");
  if (intra_sigma == 0.0) return prototypes[label];
  Feature f = prototypes[label] + gaussian(prototypes.dim(), intra_sigma, rng);
  const double norm = f.norm();
  require(norm > 0.0, ErrorKind::Domain, "encode: degenerate zero feature");
  return f / norm;
}

Feature channel_perturb(const Feature& feature, double sinr, double kappa, Rng& rng) {
  require(!std::isnan(sinr) && sinr > 0.0, ErrorKind::Domain, "channel_perturb: SINR must be > 0");
  require(kappa >= 0.0, ErrorKind::Domain, "channel_perturb: kappa must be >= 0");
  const double variance = kappa / sinr;
  if (variance == 0.0) return feature;
  return feature + gaussian(static_cast<int>(feature.size()), std::sqrt(variance), rng);
}

double cosine_similarity(const Feature& a, const Feature& b) {
  require(a.size() == b.size(), ErrorKind::Shape, "cosine_similarity: dimension mismatch");
  const double na = a.norm();
  const double nb = b.norm();
  require(na > 0.0 && nb > 0.0, ErrorKind::Domain, "cosine_similarity: zero vector");
  return std::clamp(a.dot(b) / (na * nb), -1.0, 1.0);
}

std::vector<double> similarities(const Feature& feature, const PrototypeSet& prototypes) {
  require(feature.size() == prototypes.dim(), ErrorKind::Shape, "feature and prototype dimensions differ");
  std::vector<double> s(static_cast<std::size_t>(prototypes.classes()));
  for (int c = 0; c < prototypes.classes(); ++c) s[static_cast<std::size_t>(c)] = cosine_similarity(feature, prototypes[c]);
  return s;
}

int classify(const Feature& feature, const PrototypeSet& prototypes) {
  const auto s = similarities(feature, prototypes);
  return static_cast<int>(std::max_element(s.begin(), s.end()) - s.begin());
}

std::vector<double> class_log_probabilities(const Feature& feature, const PrototypeSet& prototypes,
                                            double temperature) {
  require(temperature > 0.0, ErrorKind::Domain, "class_probabilities: temperature must be > 0");
  auto logits = similarities(feature, prototypes);
  for (auto& l : logits) l *= temperature;
  const double mx = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (double l : logits) sum += std::exp(l - mx);
  const double lse = mx + std::log(sum);
  for (auto& l : logits) l -= lse;
  return logits;
}

std::vector<double> class_probabilities(const Feature& feature, const PrototypeSet& prototypes, double temperature) {
  auto p = class_log_probabilities(feature, prototypes, temperature);
  for (auto& v : p) v = std::exp(v);
  return p;
}

std::vector<double> accuracy_profile(const PrototypeSet& prototypes, std::span<const double> sinr_linear,
                                     int samples, double intra_sigma, double kappa, Rng& rng) {
  require(samples >= 1, ErrorKind::Domain, "accuracy_profile: samples must be >= 1");
  std::vector<double> acc;
  acc.reserve(sinr_linear.size());
  const Rng start = rng;
  for (double s : sinr_linear) {
    // Every grid point replays the same labels and standard-normal draws.
    Rng local = start;
    std::uniform_int_distribution<int> label(0, prototypes.classes() - 1);
    long correct = 0;
    for (int n = 0; n < samples; ++n) {
      const int y = label(local);
      const Feature f = encode(prototypes, y, intra_sigma, local);
      correct += classify(channel_perturb(f, s, kappa, local), prototypes) == y;
    }
    acc.push_back(static_cast<double>(correct) / samples);
  }
  rng.discard(1);
  return acc;
}

}  // namespace semcom
