#pragma once

// Shared neural-network kernels: dense layers, softmax head, losses, optimizers,
// the mini-batch training loop and a finite-difference gradient checker.
//
// A trainable model exposes
//   std::vector<ParamBlock> parameters();
//   double accumulate_gradient(std::span<const Sample* const> batch);  // adds summed grads
//   double total_loss(std::span<const Sample* const> batch) const;     // summed loss
// and is driven by train_epochs() / grad_check() below.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "signet/error.hpp"
#include "signet/random.hpp"

namespace signet::nn {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

enum class Activation { tanh, relu, linear };

std::string_view to_string(Activation a);
Activation parse_activation(std::string_view text);

double activate(Activation a, double x);
/// d sigma / d pre, given pre-activation and the activation output.
double activation_derivative(Activation a, double pre, double out);
Matrix activate(Activation a, const Matrix& pre);

/// A named view of one parameter tensor and its gradient accumulator.
struct ParamBlock {
  std::string name;
  std::span<double> value;
  std::span<double> grad;
};

void zero_gradients(const std::vector<ParamBlock>& params);

/// Glorot-uniform fill in +-sqrt(6 / (fan_in + fan_out)).
void glorot_uniform(std::span<double> values, std::size_t fan_in, std::size_t fan_out, Rng& rng);

/// y = sigma(W x + b), applied column-wise to an in x B batch.
class DenseLayer {
 public:
  struct Cache {
    Matrix input;
    Matrix pre;
    Matrix output;
  };

  DenseLayer() = default;
  DenseLayer(std::size_t in, std::size_t out, Activation activation);

  std::size_t input_dim() const noexcept { return static_cast<std::size_t>(weights.cols()); }
  std::size_t output_dim() const noexcept { return static_cast<std::size_t>(weights.rows()); }

  void initialize(Rng& rng);
  Matrix forward(const Matrix& x) const;
  Matrix forward(const Matrix& x, Cache& cache) const;
  /// Accumulates dL/dW, dL/db from dL/dy and returns dL/dx.
  Matrix backward(const Cache& cache, const Matrix& grad_output);
  void append_parameters(std::vector<ParamBlock>& out, const std::string& prefix);

  Matrix weights;  // out x in
  Vector bias;
  Activation activation = Activation::linear;
  Matrix grad_weights;
  Vector grad_bias;
};

/// Multinomial logistic classifier P(c | z) = softmax(U z + b)_c.
class SoftmaxHead {
 public:
  SoftmaxHead() = default;
  SoftmaxHead(std::size_t input_dim, std::size_t classes);

  std::size_t input_dim() const noexcept { return static_cast<std::size_t>(weights.cols()); }
  std::size_t classes() const noexcept { return static_cast<std::size_t>(weights.rows()); }

  void initialize(Rng& rng);
  Matrix logits(const Matrix& z) const;
  /// Summed cross-entropy of a batch; `probs` receives the C x B probabilities.
  double loss(const Matrix& z, std::span<const int> labels, Matrix* probs = nullptr) const;
  /// Accumulates head gradients for the batch and returns dL/dz (summed-loss scale).
  Matrix backward(const Matrix& z, const Matrix& probs, std::span<const int> labels);
  void append_parameters(std::vector<ParamBlock>& out, const std::string& prefix);

  Matrix weights;  // C x d
  Vector bias;
  Matrix grad_weights;
  Vector grad_bias;
};

/// Column-wise softmax with max-subtraction.
Matrix softmax_columns(const Matrix& logits);
Vector softmax(const Vector& logits);
Vector softmax_predict(const SoftmaxHead& head, const Vector& z);

/// -(1/N) sum_i log max(P_i[y_i], 1e-12).
double cross_entropy(std::span<const Vector> predictions, std::span<const int> labels);

std::size_t argmax(const Vector& v);

// ---------------------------------------------------------------------------

enum class OptimizerKind { sgd, adam };

struct TrainConfig {
  std::size_t epochs = 30;
  std::size_t batch_size = 32;
  double learning_rate = 1e-3;
  OptimizerKind optimizer = OptimizerKind::adam;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  std::size_t early_stop_patience = 5;
  double validation_fraction = 0.1;
  std::uint64_t seed = 1;

  void validate() const;
};

struct TrainHistory {
  /// Entry 0 is the loss before the first update; entry e follows epoch e.
  std::vector<double> train_loss;
  std::vector<double> validation_loss;
  std::size_t epochs_run = 0;
  std::size_t best_epoch = 0;
  bool early_stopped = false;
  double seconds_per_epoch = 0.0;
};

class Optimizer {
 public:
  Optimizer(std::vector<ParamBlock> params, const TrainConfig& config);
  /// Applies one update from the gradients currently stored in the blocks.
  void step();

 private:
  std::vector<ParamBlock> params_;
  TrainConfig config_;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
  std::size_t t_ = 0;
};

template <class M, class S>
concept Trainable = requires(M& model, const M& cmodel, std::span<const S* const> batch) {
  { model.parameters() } -> std::same_as<std::vector<ParamBlock>>;
  { model.accumulate_gradient(batch) } -> std::convertible_to<double>;
  { cmodel.total_loss(batch) } -> std::convertible_to<double>;
};

/// Mean loss over `samples`, evaluated in chunks.
template <class Model, class Sample>
double mean_loss(const Model& model, std::span<const Sample* const> samples) {
  if (samples.empty()) return 0.0;
  constexpr std::size_t chunk = 256;
  double total = 0.0;
  for (std::size_t i = 0; i < samples.size(); i += chunk) {
    total += model.total_loss(samples.subspan(i, std::min(chunk, samples.size() - i)));
  }
  return total / static_cast<double>(samples.size());
}

/// Mini-batch training with a held-out validation slice and early stopping.
/// Returns the history; the model is left at its best-validation parameters.
template <class Model, class Sample>
  requires Trainable<Model, Sample>
TrainHistory train_epochs(Model& model, std::span<const Sample> data, const TrainConfig& config) {
  config.validate();
  if (data.empty()) throw PreconditionError("train_epochs needs a non-empty dataset");

  Rng rng(config.seed);
  std::vector<const Sample*> order(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) order[i] = &data[i];
  std::size_t n_val = 0;
  if (config.validation_fraction > 0.0 && data.size() >= 2) {
    rng.shuffle(std::span<const Sample*>(order));
    n_val = static_cast<std::size_t>(std::floor(config.validation_fraction * static_cast<double>(data.size())));
    n_val = std::clamp<std::size_t>(n_val, 1, data.size() - 1);
  }
  std::vector<const Sample*> validation(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_val));
  std::vector<const Sample*> train(order.begin() + static_cast<std::ptrdiff_t>(n_val), order.end());

  auto params = model.parameters();
  Optimizer optimizer(params, config);
  TrainHistory history;

  auto evaluate = [&]() {
    const double tl = mean_loss<Model, Sample>(model, train);
    const double vl = mean_loss<Model, Sample>(model, validation);
    if (!std::isfinite(tl) || !std::isfinite(vl)) throw DivergenceError("training loss became non-finite");
    history.train_loss.push_back(tl);
    if (!validation.empty()) history.validation_loss.push_back(vl);
    return validation.empty() ? tl : vl;
  };
  auto snapshot = [&]() {
    std::vector<std::vector<double>> copy;
    copy.reserve(params.size());
    for (const auto& p : params) copy.emplace_back(p.value.begin(), p.value.end());
    return copy;
  };

  double best = evaluate();
  auto best_params = snapshot();
  std::size_t since_best = 0;
  double seconds = 0.0;

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    rng.shuffle(std::span<const Sample*>(train));
    for (std::size_t i = 0; i < train.size(); i += config.batch_size) {
      const std::size_t len = std::min(config.batch_size, train.size() - i);
      zero_gradients(params);
      const double loss = model.accumulate_gradient(std::span<const Sample* const>(train.data() + i, len));
      if (!std::isfinite(loss)) throw DivergenceError("training loss became non-finite");
      const double scale = 1.0 / static_cast<double>(len);
      for (const auto& p : params) {
        for (double& g : p.grad) {
          g *= scale;
          if (!std::isfinite(g)) throw DivergenceError("gradient became non-finite");
        }
      }
      optimizer.step();
    }
    const double monitored = evaluate();
    seconds += std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    history.epochs_run = epoch;
    if (monitored < best) {
      best = monitored;
      best_params = snapshot();
      history.best_epoch = epoch;
      since_best = 0;
    } else if (++since_best >= config.early_stop_patience) {
      history.early_stopped = true;
      break;
    }
  }
  for (std::size_t b = 0; b < params.size(); ++b) {
    std::copy(best_params[b].begin(), best_params[b].end(), params[b].value.begin());
  }
  history.seconds_per_epoch = history.epochs_run > 0 ? seconds / static_cast<double>(history.epochs_run) : 0.0;
  return history;
}

/// Max relative error between analytic gradients and central differences over every
/// parameter, with denominator max(|analytic|, |numeric|, 1e-8).
template <class Model, class Sample>
  requires Trainable<Model, Sample>
double grad_check(Model& model, const Sample& sample, double eps) {
  if (!(eps > 0.0)) throw PreconditionError("grad_check requires eps > 0");
  auto params = model.parameters();
  const Sample* batch[] = {&sample};
  const std::span<const Sample* const> one(batch, 1);
  zero_gradients(params);
  model.accumulate_gradient(one);
  double worst = 0.0;
  for (const auto& p : params) {
    const std::vector<double> analytic(p.grad.begin(), p.grad.end());
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double original = p.value[i];
      p.value[i] = original + eps;
      const double up = model.total_loss(one);
      p.value[i] = original - eps;
      const double down = model.total_loss(one);
      p.value[i] = original;
      const double numeric = (up - down) / (2.0 * eps);
      if (!std::isfinite(numeric) || !std::isfinite(analytic[i])) {
        throw DivergenceError("non-finite gradient in " + p.name);
      }
      const double denom = std::max({std::abs(analytic[i]), std::abs(numeric), 1e-8});
      worst = std::max(worst, std::abs(analytic[i] - numeric) / denom);
    }
  }
  return worst;
}

}  // namespace signet::nn
