#include <doctest.h>

#include <cmath>

#include "semcom/error.hpp"
#include "semcom/semtask.hpp"

using namespace semcom;

namespace {

PrototypeSet axis_pair(int dim = 2) {
  Feature a = Feature::Zero(dim), b = Feature::Zero(dim);
  a[0] = 1.0;
  b[1] = 1.0;
  return PrototypeSet({a, b}, 0.5);
}

EncoderSpec spec(int dim, double margin) {
  EncoderSpec e;
  e.feature_dim = dim;
  e.margin = margin;
  e.model_bits = 1;
  e.output_bits = 1;
  return e;
}

}  // namespace

TEST_CASE("prototype construction meets the margin exactly") {
  for (int trial = 0; trial < 100; ++trial) {
    auto rng = make_stream(static_cast<std::uint64_t>(trial), Stream::Prototypes);
    const double m = 0.05 + 0.009 * trial;
    const auto set = PrototypeSet::build(spec(16 + trial % 5, m), 10, rng);
    for (int a = 0; a < 10; ++a) {
      CHECK(std::abs(set[a].norm() - 1.0) < 1e-12);
      for (int b = 0; b < a; ++b) CHECK(set[a].dot(set[b]) == doctest::Approx(1.0 - m).epsilon(1e-10));
    }
  }
}

TEST_CASE("prototype validator rejects close pairs and bad norms") {
  Feature a(2), b(2);
  a << 1.0, 0.0;
  b << std::sqrt(0.5), std::sqrt(0.5);
  CHECK_THROWS_AS(PrototypeSet({a, b}, 0.5), Error);
  CHECK_NOTHROW(PrototypeSet({a, b}, 0.25));
  CHECK_THROWS_AS(PrototypeSet({a, 2.0 * b}, 0.1), Error);
}

TEST_CASE("encode returns the prototype without jitter and unit norm with it") {
  ScenarioConfig cfg;
  const auto task = SemanticTask::build(cfg);
  auto rng = make_stream(1, Stream::Semantic);
  const auto& p = task->prototypes[1];
  CHECK(encode(p, 3, 0.0, rng) == p[3]);
  for (double s : {0.01, 0.1, 1.0, 10.0}) CHECK(std::abs(encode(p, 3, s, rng).norm() - 1.0) < 1e-9);
  CHECK_THROWS_AS(encode(p, 10, 0.1, rng), Error);
  CHECK_THROWS_AS(encode(p, -1, 0.1, rng), Error);
}

TEST_CASE("noiseless classification with moderate jitter is near perfect") {
  ScenarioConfig cfg;
  const auto task = SemanticTask::build(cfg);
  auto rng = make_stream(2, Stream::Semantic);
  for (int k = 0; k < 3; ++k) {
    const auto& p = task->prototypes[static_cast<std::size_t>(k)];
    int correct = 0;
    for (int n = 0; n < 10000; ++n) {
      const auto f = channel_perturb(encode(p, 1, 0.05, rng), INFINITY, cfg.kappa, rng);
      const auto s = similarities(f, p);
      int best = 0;
      for (int c = 1; c < p.classes(); ++c)
        if (s[static_cast<std::size_t>(c)] > s[static_cast<std::size_t>(best)]) best = c;
      correct += best == 1;
    }
    CHECK(correct >= 9990);
  }
}

TEST_CASE("channel noise has variance kappa over SINR") {
  Feature zero = Feature::Zero(100);
  auto rng = make_stream(3, Stream::Semantic);
  CHECK(channel_perturb(zero, INFINITY, 0.5, rng) == zero);
  CHECK(channel_perturb(zero, 2.0, 0.0, rng) == zero);
  CHECK_THROWS_AS(channel_perturb(zero, 0.0, 0.5, rng), Error);
  CHECK_THROWS_AS(channel_perturb(zero, -1.0, 0.5, rng), Error);
  const double sinr = 4.0, kappa = 0.5;
  double ss = 0.0;
  long n = 0;
  for (int d = 0; d < 1000; ++d) {
    const auto v = channel_perturb(zero, sinr, kappa, rng);
    ss += v.squaredNorm();
    n += v.size();
  }
  CHECK(std::abs(ss / n / (kappa / sinr) - 1.0) < 0.03);
}

TEST_CASE("cosine similarity") {
  Feature v(3), a(2), b(2), z = Feature::Zero(2);
  v << 1, 2, 3;
  a << 1, 1;
  b << 1, 0;
  CHECK(cosine_similarity(v, v) == doctest::Approx(1.0).epsilon(1e-15));
  Feature e1(2), e2(2);
  e1 << 1, 0;
  e2 << 0, 1;
  CHECK(cosine_similarity(e1, e2) == 0.0);
  CHECK(cosine_similarity(a, b) == doctest::Approx(0.70710678118654752).epsilon(1e-12));
  CHECK_THROWS_AS(cosine_similarity(a, z), Error);
  CHECK_THROWS_AS(cosine_similarity(a, v), Error);
}

TEST_CASE("classification argmax and tie-break") {
  const auto p = axis_pair();
  CHECK(classify(p[1], p) == 1);
  CHECK(classify(p[0], p) == 0);
  Feature mid(2);
  mid << 1, 1;
  CHECK(classify(mid, p) == 0);
  CHECK(classify(3.5 * p[1], p) == 1);
  Feature wrong(3);
  wrong << 1, 0, 0;
  CHECK_THROWS_AS(classify(wrong, p), Error);
}

TEST_CASE("classification agrees with brute force on two classes") {
  Feature a(2), b(2);
  a << 1, 0;
  b << std::cos(1.2), std::sin(1.2);
  const PrototypeSet p({a, b}, 0.5);
  auto rng = make_stream(4, Stream::Semantic);
  for (int n = 0; n < 10000; ++n) {
    const auto f = channel_perturb(a, 1.0, 1.0, rng);
    const double ca = f.dot(a) / f.norm();
    const double cb = f.dot(b) / f.norm();
    REQUIRE(classify(f, p) == (cb > ca ? 1 : 0));
  }
}

TEST_CASE("class probabilities") {
  const auto p = axis_pair();
  Feature mid(2);
  mid << 1, 1;
  auto pr = class_probabilities(mid, p, 3.0);
  CHECK(pr[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(pr[1] == doctest::Approx(0.5).epsilon(1e-15));

  pr = class_probabilities(p[0], p, 1.0);
  const double e = std::exp(1.0);
  CHECK(pr[0] == doctest::Approx(e / (e + 1.0)).epsilon(1e-12));
  CHECK(pr[0] == doctest::Approx(0.7310586).epsilon(1e-7));
  CHECK(pr[1] == doctest::Approx(0.2689414).epsilon(1e-6));

  CHECK(class_probabilities(p[0], p, 1e4)[0] > 1.0 - 1e-12);
  CHECK_THROWS_AS(class_probabilities(p[0], p, 0.0), Error);

  ScenarioConfig cfg;
  const auto task = SemanticTask::build(cfg);
  auto rng = make_stream(5, Stream::Semantic);
  const auto& set = task->prototypes[0];
  for (int n = 0; n < 500; ++n) {
    const auto f = channel_perturb(encode(set, n % 10, 0.02, rng), 1.0, cfg.kappa, rng);
    const auto q = class_probabilities(f, set, cfg.similarity_temperature);
    double sum = 0.0;
    for (double x : q) {
      CHECK(x > 0.0);
      sum += x;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(std::max_element(q.begin(), q.end()) - q.begin() == classify(f, set));
    const auto lq = class_log_probabilities(f, set, cfg.similarity_temperature);
    for (std::size_t c = 0; c < q.size(); ++c) CHECK(std::exp(lq[c]) == doctest::Approx(q[c]).epsilon(1e-12));
  }
}

TEST_CASE("accuracy profile: noiseless limit and monotone in noise") {
  ScenarioConfig cfg;
  const auto task = SemanticTask::build(cfg);
  std::vector<double> sinr = {INFINITY};
  for (double db = 24; db >= -3; db -= 4) sinr.push_back(db_to_linear(db));
  for (int k = 0; k < 3; ++k) {
    auto rng = make_stream(6, Stream::Evaluation);
    const auto acc = accuracy_profile(task->prototypes[static_cast<std::size_t>(k)], sinr, 2000,
                                      cfg.intra_class_sigma, cfg.kappa, rng);
    CHECK(acc[0] >= 0.999);
    for (std::size_t i = 1; i < acc.size(); ++i) CHECK(acc[i] <= acc[i - 1] + 0.01);
  }
}

TEST_CASE("dB conversion") {
  CHECK(db_to_linear(0.0) == 1.0);
  CHECK(db_to_linear(10.0) == doctest::Approx(10.0).epsilon(1e-14));
  CHECK(db_to_linear(-3.0) == doctest::Approx(0.50118723362727).epsilon(1e-12));
}
