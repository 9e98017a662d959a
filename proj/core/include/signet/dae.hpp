#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "signet/checkpoint.hpp"
#include "signet/nn.hpp"

namespace signet::dae {

using nn::Matrix;
using nn::Vector;

enum class PretrainMode {
  greedy,  ///< train each (encoder_l, decoder_l) pair on the frozen output of encoder_{l-1}
  joint,   ///< train the full encoder/decoder stack end to end on |x_hat - x|^2
};

struct DaeConfig {
  std::vector<std::size_t> hidden = {128, 64};
  nn::Activation hidden_activation = nn::Activation::tanh;
  /// Activation of the decoder that emits x_hat.
  nn::Activation output_activation = nn::Activation::linear;
  PretrainMode pretrain_mode = PretrainMode::greedy;
  std::size_t classes = 2;
};

struct LabeledVector {
  Vector x;
  int label = 0;
};

/// encoders[l] maps dim_l -> dim_{l+1}; decoders are in forward order, so decoders[0]
/// reads z^{(L)} and decoders[L-1] emits x_hat. Weights are untied.
class AutoencoderStack {
 public:
  AutoencoderStack() = default;
  AutoencoderStack(std::size_t input_dim, const DaeConfig& config, std::uint64_t seed);

  std::size_t input_dim() const { return encoders.front().input_dim(); }
  std::size_t depth() const noexcept { return encoders.size(); }

  /// Encoder l output dim equals the input dim of its mirrored decoder, and the
  /// decoder chain returns to the input dimension.
  bool mirror_shapes_ok() const;

  Matrix encode(const Matrix& x) const;
  Matrix reconstruct(const Matrix& x) const;

  std::vector<nn::DenseLayer> encoders;
  std::vector<nn::DenseLayer> decoders;
  nn::SoftmaxHead head;
};

/// Squared reconstruction error through a chain of encoder then decoder layers.
/// Sample type is a plain input vector; labels are never involved.
class ReconstructionModel {
 public:
  ReconstructionModel(std::vector<nn::DenseLayer*> encoders, std::vector<nn::DenseLayer*> decoders);

  std::vector<nn::ParamBlock> parameters();
  double accumulate_gradient(std::span<const Vector* const> batch);
  double total_loss(std::span<const Vector* const> batch) const;

 private:
  std::vector<nn::DenseLayer*> layers_;
};

/// Encoders followed by the softmax head, trained on cross-entropy.
class ClassifierModel {
 public:
  explicit ClassifierModel(AutoencoderStack& stack) : stack_(&stack) {}

  std::vector<nn::ParamBlock> parameters();
  double accumulate_gradient(std::span<const LabeledVector* const> batch);
  double total_loss(std::span<const LabeledVector* const> batch) const;

 private:
  AutoencoderStack* stack_;
};

struct PretrainResult {
  /// One history per greedy layer, or a single history in joint mode.
  std::vector<nn::TrainHistory> layers;
};

/// Unsupervised pretraining on `inputs` (takes no labels by construction).
PretrainResult pretrain(AutoencoderStack& stack, std::span<const Vector> inputs,
                        const nn::TrainConfig& config, PretrainMode mode = PretrainMode::greedy);

/// End-to-end cross-entropy training through all encoders and the head; decoders
/// are left untouched and unused.
nn::TrainHistory fine_tune(AutoencoderStack& stack, std::span<const LabeledVector> data,
                           const nn::TrainConfig& config);

/// Class probabilities: encoders then softmax.
Vector predict(const AutoencoderStack& stack, const Vector& x);
/// Probabilities for each column of x (input_dim x B), returned as C x B.
Matrix predict_batch(const AutoencoderStack& stack, const Matrix& x);

Checkpoint to_checkpoint(const AutoencoderStack& stack, std::uint64_t config_hash);
AutoencoderStack from_checkpoint(const Checkpoint& checkpoint);

}  // namespace signet::dae
