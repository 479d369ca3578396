#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "semcom/rng.hpp"

namespace semcom::nn {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

enum class Activation : std::uint32_t { Identity = 0, Tanh = 1 };

struct Layer {
  Matrix weight;  // out x in
  Vector bias;    // out
  Activation activation = Activation::Identity;
};

/// Same shapes as a Network's layers; also used for optimizer moments.
struct Gradient {
  std::vector<Matrix> weight;
  std::vector<Vector> bias;

  double squared_norm() const;
  bool all_finite() const;
  Gradient& operator+=(const Gradient& other);
  Gradient& operator*=(double scale);
};

/// Activations kept by a batched forward pass for the backward pass.
struct ForwardCache {
  std::vector<Matrix> inputs;  // input to each layer, batch x in
  std::vector<Matrix> outputs; // post-activation output of each layer
};

/// Feed-forward stack of affine layers. Rows of the input matrix are samples.
class Network {
 public:
  Network() = default;
  explicit Network(std::vector<Layer> layers);

  /// Tanh hidden layers with semi-orthogonal weights (gain 1) and an identity
  /// output layer with gain `output_gain`; biases start at zero.
  static Network init(int inputs, std::span<const int> hidden, int outputs, Rng& rng,
                      double output_gain = 0.01);

  /// Same shapes, every parameter zero.
  static Network zeros_like(const Network& other);

  int inputs() const;
  int outputs() const;
  const std::vector<Layer>& layers() const { return layers_; }
  std::vector<Layer>& layers() { return layers_; }

  Matrix forward(const Matrix& x) const;
  Matrix forward(const Matrix& x, ForwardCache& cache) const;

  /// Gradient of a scalar loss given d loss / d output (batch x outputs).
  Gradient backward(const ForwardCache& cache, const Matrix& d_output) const;

  Gradient zero_gradient() const;

  std::size_t parameter_count() const;
  std::vector<double> flat() const;
  void set_flat(std::span<const double> values);
  static std::vector<double> flatten(const Gradient& g);

  bool all_finite() const;
  bool operator==(const Network& other) const;

 private:
  std::vector<Layer> layers_;
};

/// Probability vector over action ids; masked ids hold exactly zero.
class Categorical {
 public:
  /// Max-subtracted softmax over unmasked logits. Throws Domain if every
  /// entry is masked or on a shape mismatch.
  static Categorical from_logits(std::span<const double> logits, std::span<const std::uint8_t> mask);

  explicit Categorical(std::vector<double> probs);

  std::size_t size() const { return probs_.size(); }
  const std::vector<double>& probs() const { return probs_; }
  double prob(int action) const { return probs_[static_cast<std::size_t>(action)]; }

  /// Throws Domain for a zero-probability (masked) action.
  double log_prob(int action) const;
  int sample(Rng& rng) const;
  int argmax() const;

 private:
  std::vector<double> probs_;
  std::vector<double> log_probs_;
};

/// policy(state) under the mask, for a single state.
Categorical forward(const Network& policy, std::span<const double> state, std::span<const std::uint8_t> mask);

/// sum p log(p / q). Throws Domain when supports are incompatible.
double kl_divergence(const Categorical& p, const Categorical& q);

/// Row-wise masked log-softmax; masked entries are -inf.
Matrix masked_log_softmax(const Matrix& logits, const std::vector<std::uint8_t>& mask);

/// Sum of squared parameters and its gradient, 2 * theta.
double sum_squares(const Network& net, Gradient* grad);

/// 0.5 * (out[i, action_i] - target_i)^2 averaged over rows; fills d_output.
double selected_mse(const Matrix& output, std::span<const int> actions, std::span<const double> targets,
                    Matrix* d_output);

/// theta + delta * g. Throws Divergence if g has a non-finite entry.
Network ascend(const Network& params, const Gradient& grad, double delta);

/// Adaptive-moment optimizer; `direction` +1 ascends, -1 descends.
class Adam {
 public:
  explicit Adam(const Network& shape, double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);
  void step(Network& params, const Gradient& grad, double direction);

 private:
  Gradient m_;
  Gradient v_;
  double lr_, beta1_, beta2_, eps_;
  long t_ = 0;
};

/// Binary checkpoint, little-endian regardless of host:
///   "SCNN" | u32 version=1 | u32 layers | per layer: u32 out, u32 in, u32 activation
///   | f64 weights row-major | f64 bias
void save_checkpoint(const Network& net, const std::string& path);
Network load_checkpoint(const std::string& path);
std::vector<std::uint8_t> serialize(const Network& net);
Network deserialize(std::span<const std::uint8_t> bytes);

}  // namespace semcom::nn
