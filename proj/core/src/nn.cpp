#include "signet/nn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace signet::nn {

std::string_view to_string(Activation a) {
  switch (a) {
    case Activation::tanh: return "tanh";
    case Activation::relu: return "relu";
    case Activation::linear: return "linear";
  }
  return "unknown";
}

Activation parse_activation(std::string_view text) {
  for (const auto a : {Activation::tanh, Activation::relu, Activation::linear}) {
    if (text == to_string(a)) return a;
  }
  throw PreconditionError("unknown activation '" + std::string(text) + "'");
}

double activate(Activation a, double x) {
  switch (a) {
    case Activation::tanh: return std::tanh(x);
    case Activation::relu: return x > 0.0 ? x : 0.0;
    case Activation::linear: return x;
  }
  return x;
}

double activation_derivative(Activation a, double pre, double out) {
  switch (a) {
    case Activation::tanh: return 1.0 - out * out;
    case Activation::relu: return pre > 0.0 ? 1.0 : 0.0;
    case Activation::linear: return 1.0;
  }
  return 1.0;
}

Matrix activate(Activation a, const Matrix& pre) {
  switch (a) {
    case Activation::tanh: return pre.array().tanh().matrix();
    case Activation::relu: return pre.cwiseMax(0.0);
    case Activation::linear: return pre;
  }
  return pre;
}

void zero_gradients(const std::vector<ParamBlock>& params) {
  for (const auto& p : params) std::fill(p.grad.begin(), p.grad.end(), 0.0);
}

void glorot_uniform(std::span<double> values, std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  for (double& v : values) v = rng.uniform(-limit, limit);
}

namespace {

std::span<double> span_of(Matrix& m) { return {m.data(), static_cast<std::size_t>(m.size())}; }
std::span<double> span_of(Vector& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }

}  // namespace

// ---------------------------------------------------------------------------

DenseLayer::DenseLayer(std::size_t in, std::size_t out, Activation act)
    : weights(Matrix::Zero(static_cast<Eigen::Index>(out), static_cast<Eigen::Index>(in))),
      bias(Vector::Zero(static_cast<Eigen::Index>(out))),
      activation(act),
      grad_weights(Matrix::Zero(weights.rows(), weights.cols())),
      grad_bias(Vector::Zero(bias.size())) {}

void DenseLayer::initialize(Rng& rng) {
  glorot_uniform(span_of(weights), input_dim(), output_dim(), rng);
  bias.setZero();
}

Matrix DenseLayer::forward(const Matrix& x) const {
  if (static_cast<std::size_t>(x.rows()) != input_dim()) {
    throw ShapeError("dense layer expects " + std::to_string(input_dim()) + " inputs, got " +
                     std::to_string(x.rows()));
  }
  Matrix pre = weights * x;
  pre.colwise() += bias;
  return activate(activation, pre);
}

Matrix DenseLayer::forward(const Matrix& x, Cache& cache) const {
  if (static_cast<std::size_t>(x.rows()) != input_dim()) {
    throw ShapeError("dense layer expects " + std::to_string(input_dim()) + " inputs, got " +
                     std::to_string(x.rows()));
  }
  cache.input = x;
  cache.pre = weights * x;
  cache.pre.colwise() += bias;
  cache.output = activate(activation, cache.pre);
  return cache.output;
}

Matrix DenseLayer::backward(const Cache& cache, const Matrix& grad_output) {
  Matrix delta = grad_output;
  switch (activation) {
    case Activation::tanh:
      delta.array() *= 1.0 - cache.output.array().square();
      break;
    case Activation::relu:
      delta.array() *= (cache.pre.array() > 0.0).cast<double>();
      break;
    case Activation::linear:
      break;
  }
  grad_weights.noalias() += delta * cache.input.transpose();
  grad_bias += delta.rowwise().sum();
  return weights.transpose() * delta;
}

void DenseLayer::append_parameters(std::vector<ParamBlock>& out, const std::string& prefix) {
  out.push_back({prefix + ".weights", span_of(weights), span_of(grad_weights)});
  out.push_back({prefix + ".bias", span_of(bias), span_of(grad_bias)});
}

// ---------------------------------------------------------------------------

SoftmaxHead::SoftmaxHead(std::size_t input_dim, std::size_t classes)
    : weights(Matrix::Zero(static_cast<Eigen::Index>(classes), static_cast<Eigen::Index>(input_dim))),
      bias(Vector::Zero(static_cast<Eigen::Index>(classes))),
      grad_weights(Matrix::Zero(weights.rows(), weights.cols())),
      grad_bias(Vector::Zero(bias.size())) {
  if (classes < 2) throw PreconditionError("softmax head needs at least 2 classes");
}

void SoftmaxHead::initialize(Rng& rng) {
  glorot_uniform(span_of(weights), input_dim(), classes(), rng);
  bias.setZero();
}

Matrix SoftmaxHead::logits(const Matrix& z) const {
  if (static_cast<std::size_t>(z.rows()) != input_dim()) {
    throw ShapeError("softmax head expects " + std::to_string(input_dim()) + " features, got " +
                     std::to_string(z.rows()));
  }
  Matrix out = weights * z;
  out.colwise() += bias;
  return out;
}

double SoftmaxHead::loss(const Matrix& z, std::span<const int> labels, Matrix* probs) const {
  const Matrix l = logits(z);
  double total = 0.0;
  for (Eigen::Index j = 0; j < l.cols(); ++j) {
    // log-sum-exp form of -log softmax(l)_y.
    const double peak = l.col(j).maxCoeff();
    const double lse = peak + std::log((l.col(j).array() - peak).exp().sum());
    total += lse - l(labels[static_cast<std::size_t>(j)], j);
  }
  if (probs != nullptr) *probs = softmax_columns(l);
  return total;
}

Matrix SoftmaxHead::backward(const Matrix& z, const Matrix& probs, std::span<const int> labels) {
  Matrix delta = probs;
  for (Eigen::Index j = 0; j < delta.cols(); ++j) delta(labels[static_cast<std::size_t>(j)], j) -= 1.0;
  grad_weights.noalias() += delta * z.transpose();
  grad_bias += delta.rowwise().sum();
  return weights.transpose() * delta;
}

void SoftmaxHead::append_parameters(std::vector<ParamBlock>& out, const std::string& prefix) {
  out.push_back({prefix + ".weights", span_of(weights), span_of(grad_weights)});
  out.push_back({prefix + ".bias", span_of(bias), span_of(grad_bias)});
}

Matrix softmax_columns(const Matrix& logits) {
  Matrix out(logits.rows(), logits.cols());
  for (Eigen::Index j = 0; j < logits.cols(); ++j) {
    const double peak = logits.col(j).maxCoeff();
    out.col(j) = (logits.col(j).array() - peak).exp().matrix();
    out.col(j) /= out.col(j).sum();
  }
  return out;
}

Vector softmax(const Vector& logits) { return softmax_columns(logits); }

Vector softmax_predict(const SoftmaxHead& head, const Vector& z) {
  return softmax_columns(head.logits(z));
}

double cross_entropy(std::span<const Vector> predictions, std::span<const int> labels) {
  if (predictions.empty() || predictions.size() != labels.size()) {
    throw PreconditionError("cross_entropy needs equal, non-zero numbers of predictions and labels");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const double p = predictions[i][labels[i]];
    total -= std::log(std::max(p, 1e-12));
  }
  return total / static_cast<double>(predictions.size());
}

std::size_t argmax(const Vector& v) {
  Eigen::Index best = 0;
  v.maxCoeff(&best);
  return static_cast<std::size_t>(best);
}

// ---------------------------------------------------------------------------

void TrainConfig::validate() const {
  if (epochs < 1) throw PreconditionError("epochs must be >= 1");
  if (batch_size < 1) throw PreconditionError("batch_size must be >= 1");
  if (!(learning_rate >= 0.0)) throw PreconditionError("learning_rate must be >= 0");
  if (!(validation_fraction >= 0.0 && validation_fraction < 0.5)) {
    throw PreconditionError("validation_fraction must lie in [0, 0.5)");
  }
  if (early_stop_patience < 1) throw PreconditionError("early_stop_patience must be >= 1");
}

Optimizer::Optimizer(std::vector<ParamBlock> params, const TrainConfig& config)
    : params_(std::move(params)), config_(config) {
  if (config_.optimizer == OptimizerKind::adam) {
    for (const auto& p : params_) {
      m_.emplace_back(p.value.size(), 0.0);
      v_.emplace_back(p.value.size(), 0.0);
    }
  }
}

void Optimizer::step() {
  const double lr = config_.learning_rate;
  if (config_.optimizer == OptimizerKind::sgd) {
    for (const auto& p : params_) {
      for (std::size_t i = 0; i < p.value.size(); ++i) p.value[i] -= lr * p.grad[i];
    }
    return;
  }
  ++t_;
  const double b1 = config_.adam_beta1;
  const double b2 = config_.adam_beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  for (std::size_t b = 0; b < params_.size(); ++b) {
    auto& p = params_[b];
    auto& m = m_[b];
    auto& v = v_[b];
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double g = p.grad[i];
      m[i] = b1 * m[i] + (1.0 - b1) * g;
      v[i] = b2 * v[i] + (1.0 - b2) * g * g;
      p.value[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + config_.adam_epsilon);
    }
  }
}

}  // namespace signet::nn
