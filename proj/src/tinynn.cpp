#include "semcom/tinynn.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>

#include "semcom/error.hpp"

namespace semcom::nn {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

Matrix semi_orthogonal(int rows, int cols, Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  const bool tall = rows >= cols;
  const int r = tall ? rows : cols;
  const int c = tall ? cols : rows;
  Eigen::MatrixXd a(r, c);
  for (int j = 0; j < c; ++j)
    for (int i = 0; i < r; ++i) a(i, j) = n(rng);
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(r, c);
  // Fix column signs so the result does not depend on QR sign conventions.
  const Eigen::MatrixXd rr = qr.matrixQR().topRows(c).triangularView<Eigen::Upper>();
  for (int j = 0; j < c; ++j)
    if (rr(j, j) < 0) q.col(j) *= -1.0;
  if (tall) return q;
  return q.transpose();
}

void apply(Activation act, Matrix& z) {
  if (act == Activation::Tanh) z = z.array().tanh().matrix();
}

}  // namespace

double Gradient::squared_norm() const {
  double s = 0.0;
  for (const auto& w : weight) s += w.squaredNorm();
  for (const auto& b : bias) s += b.squaredNorm();
  return s;
}

bool Gradient::all_finite() const {
  for (const auto& w : weight)
    if (!w.allFinite()) return false;
  for (const auto& b : bias)
    if (!b.allFinite()) return false;
  return true;
}

Gradient& Gradient::operator+=(const Gradient& other) {
  require(other.weight.size() == weight.size(), ErrorKind::Shape, "gradient shapes differ");
  for (std::size_t l = 0; l < weight.size(); ++l) {
    weight[l] += other.weight[l];
    bias[l] += other.bias[l];
  }
  return *this;
}

Gradient& Gradient::operator*=(double scale) {
  for (auto& w : weight) w *= scale;
  for (auto& b : bias) b *= scale;
  return *this;
}

Network::Network(std::vector<Layer> layers) : layers_(std::move(layers)) {
  require(!layers_.empty(), ErrorKind::Shape, "network needs at least one layer");
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& L = layers_[l];
    require(L.bias.size() == L.weight.rows(), ErrorKind::Shape, "layer bias length differs from output width");
    if (l > 0)
      require(L.weight.cols() == layers_[l - 1].weight.rows(), ErrorKind::Shape, "layer shapes do not chain");
  }
}

Network Network::init(int inputs, std::span<const int> hidden, int outputs, Rng& rng, double output_gain) {
  require(inputs > 0 && outputs > 0, ErrorKind::Shape, "network dimensions must be positive");
  std::vector<Layer> layers;
  int fan_in = inputs;
  for (int h : hidden) {
    require(h > 0, ErrorKind::Shape, "hidden width must be positive");
    layers.push_back({semi_orthogonal(h, fan_in, rng), Vector::Zero(h), Activation::Tanh});
    fan_in = h;
  }
  layers.push_back({output_gain * semi_orthogonal(outputs, fan_in, rng), Vector::Zero(outputs), Activation::Identity});
  return Network(std::move(layers));
}

Network Network::zeros_like(const Network& other) {
  Network n = other;
  for (auto& l : n.layers_) {
    l.weight.setZero();
    l.bias.setZero();
  }
  return n;
}

int Network::inputs() const { return static_cast<int>(layers_.front().weight.cols()); }
int Network::outputs() const { return static_cast<int>(layers_.back().weight.rows()); }

Matrix Network::forward(const Matrix& x) const {
  require(x.cols() == inputs(), ErrorKind::Shape, "forward: input width differs from the network");
  Matrix a = x;
  for (const auto& l : layers_) {
    Matrix z = a * l.weight.transpose();
    z.rowwise() += l.bias.transpose();
    apply(l.activation, z);
    a = std::move(z);
  }
  return a;
}

Matrix Network::forward(const Matrix& x, ForwardCache& cache) const {
  require(x.cols() == inputs(), ErrorKind::Shape, "forward: input width differs from the network");
  cache.inputs.clear();
  cache.outputs.clear();
  Matrix a = x;
  for (const auto& l : layers_) {
    cache.inputs.push_back(a);
    Matrix z = a * l.weight.transpose();
    z.rowwise() += l.bias.transpose();
    apply(l.activation, z);
    cache.outputs.push_back(z);
    a = std::move(z);
  }
  return a;
}

Gradient Network::backward(const ForwardCache& cache, const Matrix& d_output) const {
  require(cache.inputs.size() == layers_.size(), ErrorKind::Shape, "backward: cache does not match the network");
  require(d_output.rows() == cache.outputs.back().rows() && d_output.cols() == outputs(), ErrorKind::Shape,
          "backward: output gradient has the wrong shape");
  Gradient g = zero_gradient();
  Matrix delta = d_output;
  for (std::size_t i = layers_.size(); i-- > 0;) {
    const auto& l = layers_[i];
    if (l.activation == Activation::Tanh)
      delta = (delta.array() * (1.0 - cache.outputs[i].array().square())).matrix();
    g.weight[i].noalias() = delta.transpose() * cache.inputs[i];
    g.bias[i] = delta.colwise().sum().transpose();
    if (i > 0) delta = delta * l.weight;
  }
  return g;
}

Gradient Network::zero_gradient() const {
  Gradient g;
  for (const auto& l : layers_) {
    g.weight.push_back(Matrix::Zero(l.weight.rows(), l.weight.cols()));
    g.bias.push_back(Vector::Zero(l.bias.size()));
  }
  return g;
}

std::size_t Network::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers_) n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
  return n;
}

std::vector<double> Network::flat() const {
  std::vector<double> v;
  v.reserve(parameter_count());
  for (const auto& l : layers_) {
    v.insert(v.end(), l.weight.data(), l.weight.data() + l.weight.size());
    v.insert(v.end(), l.bias.data(), l.bias.data() + l.bias.size());
  }
  return v;
}

void Network::set_flat(std::span<const double> values) {
  require(values.size() == parameter_count(), ErrorKind::Shape, "set_flat: wrong parameter count");
  std::size_t at = 0;
  for (auto& l : layers_) {
    std::copy_n(values.begin() + static_cast<std::ptrdiff_t>(at), l.weight.size(), l.weight.data());
    at += static_cast<std::size_t>(l.weight.size());
    std::copy_n(values.begin() + static_cast<std::ptrdiff_t>(at), l.bias.size(), l.bias.data());
    at += static_cast<std::size_t>(l.bias.size());
  }
}

std::vector<double> Network::flatten(const Gradient& g) {
  std::vector<double> v;
  for (std::size_t l = 0; l < g.weight.size(); ++l) {
    v.insert(v.end(), g.weight[l].data(), g.weight[l].data() + g.weight[l].size());
    v.insert(v.end(), g.bias[l].data(), g.bias[l].data() + g.bias[l].size());
  }
  return v;
}

bool Network::all_finite() const {
  return std::all_of(layers_.begin(), layers_.end(),
                     [](const Layer& l) { return l.weight.allFinite() && l.bias.allFinite(); });
}

bool Network::operator==(const Network& other) const {
  if (layers_.size() != other.layers_.size()) return false;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const auto& a = layers_[i];
    const auto& b = other.layers_[i];
    if (a.activation != b.activation || a.weight.rows() != b.weight.rows() || a.weight.cols() != b.weight.cols() ||
        a.weight != b.weight || a.bias != b.bias)
      return false;
  }
  return true;
}

Categorical Categorical::from_logits(std::span<const double> logits, std::span<const std::uint8_t> mask) {
  require(logits.size() == mask.size(), ErrorKind::Shape, "categorical: logits and mask differ in length");
  double mx = kNegInf;
  for (std::size_t a = 0; a < logits.size(); ++a) {
    if (!mask[a]) continue;
    require(!std::isnan(logits[a]) && logits[a] != std::numeric_limits<double>::infinity(), ErrorKind::Domain,
            "categorical: non-finite logit");
    mx = std::max(mx, logits[a]);
  }
  require(mx != kNegInf, ErrorKind::Domain, "categorical: every action is masked");
  double sum = 0.0;
  for (std::size_t a = 0; a < logits.size(); ++a)
    if (mask[a]) sum += std::exp(logits[a] - mx);
  const double log_sum = std::log(sum);
  Categorical c({});
  c.probs_.assign(logits.size(), 0.0);
  c.log_probs_.assign(logits.size(), kNegInf);
  for (std::size_t a = 0; a < logits.size(); ++a) {
    if (!mask[a]) continue;
    c.log_probs_[a] = logits[a] - mx - log_sum;
    c.probs_[a] = std::exp(c.log_probs_[a]);
  }
  return c;
}

Categorical::Categorical(std::vector<double> probs) : probs_(std::move(probs)) {
  log_probs_.reserve(probs_.size());
  double sum = 0.0;
  for (double p : probs_) {
    require(p >= 0.0 && std::isfinite(p), ErrorKind::Domain, "categorical: probabilities must be finite and >= 0");
    sum += p;
    log_probs_.push_back(p > 0.0 ? std::log(p) : kNegInf);
  }
  if (!probs_.empty())
    require(std::abs(sum - 1.0) <= 1e-9, ErrorKind::Domain, "categorical: probabilities must sum to 1");
}

double Categorical::log_prob(int action) const {
  require(action >= 0 && static_cast<std::size_t>(action) < probs_.size(), ErrorKind::Domain,
          "log_prob: action id out of range");
  require(probs_[static_cast<std::size_t>(action)] > 0.0, ErrorKind::Domain, "log_prob: action is masked");
  return log_probs_[static_cast<std::size_t>(action)];
}

int Categorical::sample(Rng& rng) const {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double u = unit(rng);
  double cum = 0.0;
  int last = -1;
  for (std::size_t a = 0; a < probs_.size(); ++a) {
    if (probs_[a] <= 0.0) continue;
    cum += probs_[a];
    last = static_cast<int>(a);
    if (u < cum) return last;
  }
  return last;
}

int Categorical::argmax() const {
  return static_cast<int>(std::max_element(probs_.begin(), probs_.end()) - probs_.begin());
}

Categorical forward(const Network& policy, std::span<const double> state, std::span<const std::uint8_t> mask) {
  require(static_cast<int>(state.size()) == policy.inputs(), ErrorKind::Shape,
          "forward: state width differs from the network input");
  require(static_cast<int>(mask.size()) == policy.outputs(), ErrorKind::Shape,
          "forward: mask width differs from the network output");
  const Matrix x = Eigen::Map<const Matrix>(state.data(), 1, static_cast<Eigen::Index>(state.size()));
  const Matrix logits = policy.forward(x);
  return Categorical::from_logits(std::span<const double>(logits.data(), static_cast<std::size_t>(logits.size())),
                                  mask);
}

double kl_divergence(const Categorical& p, const Categorical& q) {
  require(p.size() == q.size(), ErrorKind::Domain, "kl_divergence: supports differ in size");
  double kl = 0.0;
  for (std::size_t a = 0; a < p.size(); ++a) {
    const double pa = p.probs()[a];
    if (pa <= 0.0) continue;
    require(q.probs()[a] > 0.0, ErrorKind::Domain, "kl_divergence: q is zero where p is positive");
    kl += pa * (p.log_prob(static_cast<int>(a)) - q.log_prob(static_cast<int>(a)));
  }
  return std::max(kl, 0.0);
}

Matrix masked_log_softmax(const Matrix& logits, const std::vector<std::uint8_t>& mask) {
  require(mask.size() == static_cast<std::size_t>(logits.size()), ErrorKind::Shape,
          "masked_log_softmax: mask size differs from logits");
  Matrix out(logits.rows(), logits.cols());
  const auto cols = static_cast<std::size_t>(logits.cols());
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    const std::uint8_t* m = mask.data() + static_cast<std::size_t>(r) * cols;
    double mx = kNegInf;
    for (Eigen::Index c = 0; c < logits.cols(); ++c)
      if (m[c]) mx = std::max(mx, logits(r, c));
    require(mx != kNegInf, ErrorKind::Domain, "masked_log_softmax: every action is masked");
    double sum = 0.0;
    for (Eigen::Index c = 0; c < logits.cols(); ++c)
      if (m[c]) sum += std::exp(logits(r, c) - mx);
    const double lse = mx + std::log(sum);
    for (Eigen::Index c = 0; c < logits.cols(); ++c) out(r, c) = m[c] ? logits(r, c) - lse : kNegInf;
  }
  return out;
}

double sum_squares(const Network& net, Gradient* grad) {
  double s = 0.0;
  if (grad) *grad = net.zero_gradient();
  for (std::size_t l = 0; l < net.layers().size(); ++l) {
    const auto& L = net.layers()[l];
    s += L.weight.squaredNorm() + L.bias.squaredNorm();
    if (grad) {
      grad->weight[l] = 2.0 * L.weight;
      grad->bias[l] = 2.0 * L.bias;
    }
  }
  return s;
}

double selected_mse(const Matrix& output, std::span<const int> actions, std::span<const double> targets,
                    Matrix* d_output) {
  require(actions.size() == static_cast<std::size_t>(output.rows()) && targets.size() == actions.size(),
          ErrorKind::Shape, "selected_mse: batch sizes differ");
  const double n = static_cast<double>(output.rows());
  if (d_output) *d_output = Matrix::Zero(output.rows(), output.cols());
  double loss = 0.0;
  for (Eigen::Index r = 0; r < output.rows(); ++r) {
    const int a = actions[static_cast<std::size_t>(r)];
    require(a >= 0 && a < output.cols(), ErrorKind::Domain, "selected_mse: action out of range");
    const double diff = output(r, a) - targets[static_cast<std::size_t>(r)];
    loss += 0.5 * diff * diff;
    if (d_output) (*d_output)(r, a) = diff / n;
  }
  return loss / n;
}

Network ascend(const Network& params, const Gradient& grad, double delta) {
  require(delta > 0.0, ErrorKind::Domain, "ascend: step size must be > 0");
  require(grad.weight.size() == params.layers().size(), ErrorKind::Shape, "ascend: gradient shape mismatch");
  require(grad.all_finite(), ErrorKind::Divergence, "ascend: non-finite gradient");
  Network next = params;
  for (std::size_t l = 0; l < next.layers().size(); ++l) {
    auto& L = next.layers()[l];
    require(grad.weight[l].rows() == L.weight.rows() && grad.weight[l].cols() == L.weight.cols(), ErrorKind::Shape,
            "ascend: gradient shape mismatch");
    L.weight += delta * grad.weight[l];
    L.bias += delta * grad.bias[l];
  }
  return next;
}

Adam::Adam(const Network& shape, double lr, double beta1, double beta2, double eps)
    : m_(shape.zero_gradient()), v_(shape.zero_gradient()), lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

void Adam::step(Network& params, const Gradient& grad, double direction) {
  require(grad.all_finite(), ErrorKind::Divergence, "adam: non-finite gradient");
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  auto update = [&](auto& p, auto& m, auto& v, const auto& g) {
    m = beta1_ * m + (1.0 - beta1_) * g;
    v = (beta2_ * v.array() + (1.0 - beta2_) * g.array().square()).matrix();
    p.array() += direction * lr_ * (m.array() / c1) / ((v.array() / c2).sqrt() + eps_);
  };
  for (std::size_t l = 0; l < params.layers().size(); ++l) {
    auto& L = params.layers()[l];
    update(L.weight, m_.weight[l], v_.weight[l], grad.weight[l]);
    update(L.bias, m_.bias[l], v_.bias[l], grad.bias[l]);
  }
}

namespace {

constexpr std::uint32_t kCheckpointVersion = 1;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_f64(std::vector<std::uint8_t>& out, double d) {
  const auto v = std::bit_cast<std::uint64_t>(d);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

struct Reader {
  std::span<const std::uint8_t> bytes;
  std::size_t at = 0;

  std::uint64_t take(int n) {
    require(at + static_cast<std::size_t>(n) <= bytes.size(), ErrorKind::Parse, "checkpoint: truncated file");
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(bytes[at + static_cast<std::size_t>(i)]) << (8 * i);
    at += static_cast<std::size_t>(n);
    return v;
  }
  std::uint32_t u32() { return static_cast<std::uint32_t>(take(4)); }
  double f64() { return std::bit_cast<double>(take(8)); }
};

}  // namespace

std::vector<std::uint8_t> serialize(const Network& net) {
  std::vector<std::uint8_t> out{'S', 'C', 'N', 'N'};
  put_u32(out, kCheckpointVersion);
  put_u32(out, static_cast<std::uint32_t>(net.layers().size()));
  for (const auto& l : net.layers()) {
    put_u32(out, static_cast<std::uint32_t>(l.weight.rows()));
    put_u32(out, static_cast<std::uint32_t>(l.weight.cols()));
    put_u32(out, static_cast<std::uint32_t>(l.activation));
    for (Eigen::Index i = 0; i < l.weight.size(); ++i) put_f64(out, l.weight.data()[i]);
    for (Eigen::Index i = 0; i < l.bias.size(); ++i) put_f64(out, l.bias[i]);
  }
  return out;
}

Network deserialize(std::span<const std::uint8_t> bytes) {
  require(bytes.size() >= 4 && std::equal(bytes.begin(), bytes.begin() + 4, "SCNN"), ErrorKind::Parse,
          "checkpoint: bad magic");
  Reader r{bytes, 4};
  const auto version = r.u32();
  require(version == kCheckpointVersion, ErrorKind::Parse,
          "checkpoint: unsupported version " + std::to_string(version));
  const auto count = r.u32();
  require(count >= 1 && count <= 64, ErrorKind::Parse, "checkpoint: implausible layer count");
  std::vector<Layer> layers;
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto rows = r.u32();
    const auto cols = r.u32();
    const auto act = r.u32();
    require(rows > 0 && cols > 0 && rows <= (1u << 20) && cols <= (1u << 20), ErrorKind::Parse,
            "checkpoint: implausible layer shape");
    require(act <= 1, ErrorKind::Parse, "checkpoint: unknown activation tag");
    Layer l{Matrix(rows, cols), Vector(rows), static_cast<Activation>(act)};
    for (Eigen::Index k = 0; k < l.weight.size(); ++k) l.weight.data()[k] = r.f64();
    for (Eigen::Index k = 0; k < l.bias.size(); ++k) l.bias[k] = r.f64();
    layers.push_back(std::move(l));
  }
  require(r.at == bytes.size(), ErrorKind::Parse, "checkpoint: trailing bytes");
  try {
    return Network(std::move(layers));
  } catch (const Error& e) {
    fail(ErrorKind::Parse, std::string("checkpoint: ") + e.what());
  }
}

void save_checkpoint(const Network& net, const std::string& path) {
  const auto bytes = serialize(net);
  std::ofstream f(path, std::ios::binary);
  require(static_cast<bool>(f), ErrorKind::Io, "cannot open " + path + " for writing");
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  require(static_cast<bool>(f), ErrorKind::Io, "failed writing " + path);
}

Network load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  require(static_cast<bool>(f), ErrorKind::Io, "cannot open " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return deserialize(bytes);
}

}  // namespace semcom::nn
