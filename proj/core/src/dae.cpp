#include "signet/dae.hpp"

#include <string>

#include "signet/error.hpp"

namespace signet::dae {

namespace {

Matrix stack_columns(std::span<const Vector* const> batch) {
  if (batch.empty()) return {};
  Matrix x(batch.front()->size(), static_cast<Eigen::Index>(batch.size()));
  for (std::size_t j = 0; j < batch.size(); ++j) {
    if (batch[j]->size() != x.rows()) throw ShapeError("inconsistent input dimensions in batch");
    x.col(static_cast<Eigen::Index>(j)) = *batch[j];
  }
  return x;
}

Matrix stack_columns(std::span<const LabeledVector* const> batch, std::vector<int>& labels) {
  labels.resize(batch.size());
  if (batch.empty()) return {};
  Matrix x(batch.front()->x.size(), static_cast<Eigen::Index>(batch.size()));
  for (std::size_t j = 0; j < batch.size(); ++j) {
    if (batch[j]->x.size() != x.rows()) throw ShapeError("inconsistent input dimensions in batch");
    x.col(static_cast<Eigen::Index>(j)) = batch[j]->x;
    labels[j] = batch[j]->label;
  }
  return x;
}

std::string activation_name(nn::Activation a) { return std::string(nn::to_string(a)); }

}  // namespace

AutoencoderStack::AutoencoderStack(std::size_t input_dim, const DaeConfig& config, std::uint64_t seed) {
  if (config.hidden.empty()) throw PreconditionError("autoencoder needs at least one hidden layer");
  if (input_dim == 0) throw PreconditionError("autoencoder input dimension must be >= 1");
  Rng rng(seed);
  std::vector<std::size_t> dims{input_dim};
  dims.insert(dims.end(), config.hidden.begin(), config.hidden.end());
  const std::size_t depth = config.hidden.size();
  for (std::size_t l = 0; l < depth; ++l) {
    encoders.emplace_back(dims[l], dims[l + 1], config.hidden_activation);
    encoders.back().initialize(rng);
  }
  for (std::size_t l = depth; l > 0; --l) {
    const auto act = l == 1 ? config.output_activation : config.hidden_activation;
    decoders.emplace_back(dims[l], dims[l - 1], act);
    decoders.back().initialize(rng);
  }
  head = nn::SoftmaxHead(dims.back(), config.classes);
  head.initialize(rng);
}

bool AutoencoderStack::mirror_shapes_ok() const {
  const std::size_t depth = encoders.size();
  if (decoders.size() != depth || depth == 0) return false;
  for (std::size_t l = 0; l < depth; ++l) {
    const auto& enc = encoders[l];
    const auto& dec = decoders[depth - 1 - l];
    if (enc.output_dim() != dec.input_dim() || enc.input_dim() != dec.output_dim()) return false;
    if (l > 0 && encoders[l - 1].output_dim() != enc.input_dim()) return false;
  }
  return head.input_dim() == encoders.back().output_dim();
}

Matrix AutoencoderStack::encode(const Matrix& x) const {
  Matrix h = x;
  for (const auto& e : encoders) h = e.forward(h);
  return h;
}

Matrix AutoencoderStack::reconstruct(const Matrix& x) const {
  Matrix h = encode(x);
  for (const auto& d : decoders) h = d.forward(h);
  return h;
}

// ---------------------------------------------------------------------------

ReconstructionModel::ReconstructionModel(std::vector<nn::DenseLayer*> encoders,
                                         std::vector<nn::DenseLayer*> decoders) {
  layers_ = std::move(encoders);
  layers_.insert(layers_.end(), decoders.begin(), decoders.end());
  if (layers_.empty()) throw PreconditionError("reconstruction model needs layers");
  if (layers_.front()->input_dim() != layers_.back()->output_dim()) {
    throw ShapeError("reconstruction chain must return to its input dimension");
  }
}

std::vector<nn::ParamBlock> ReconstructionModel::parameters() {
  std::vector<nn::ParamBlock> out;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    layers_[i]->append_parameters(out, "layer" + std::to_string(i));
  }
  return out;
}

double ReconstructionModel::accumulate_gradient(std::span<const Vector* const> batch) {
  const Matrix x = stack_columns(batch);
  std::vector<nn::DenseLayer::Cache> caches(layers_.size());
  Matrix h = x;
  for (std::size_t i = 0; i < layers_.size(); ++i) h = layers_[i]->forward(h, caches[i]);
  const Matrix diff = h - x;
  Matrix grad = 2.0 * diff;
  for (std::size_t i = layers_.size(); i > 0; --i) grad = layers_[i - 1]->backward(caches[i - 1], grad);
  return diff.squaredNorm();
}

double ReconstructionModel::total_loss(std::span<const Vector* const> batch) const {
  const Matrix x = stack_columns(batch);
  Matrix h = x;
  for (const auto* layer : layers_) h = layer->forward(h);
  return (h - x).squaredNorm();
}

// ---------------------------------------------------------------------------

std::vector<nn::ParamBlock> ClassifierModel::parameters() {
  std::vector<nn::ParamBlock> out;
  for (std::size_t i = 0; i < stack_->encoders.size(); ++i) {
    stack_->encoders[i].append_parameters(out, "encoder" + std::to_string(i));
  }
  stack_->head.append_parameters(out, "head");
  return out;
}

double ClassifierModel::accumulate_gradient(std::span<const LabeledVector* const> batch) {
  std::vector<int> labels;
  const Matrix x = stack_columns(batch, labels);
  auto& encs = stack_->encoders;
  std::vector<nn::DenseLayer::Cache> caches(encs.size());
  Matrix h = x;
  for (std::size_t i = 0; i < encs.size(); ++i) h = encs[i].forward(h, caches[i]);
  Matrix probs;
  const double loss = stack_->head.loss(h, labels, &probs);
  Matrix grad = stack_->head.backward(h, probs, labels);
  for (std::size_t i = encs.size(); i > 0; --i) grad = encs[i - 1].backward(caches[i - 1], grad);
  return loss;
}

double ClassifierModel::total_loss(std::span<const LabeledVector* const> batch) const {
  std::vector<int> labels;
  const Matrix x = stack_columns(batch, labels);
  return stack_->head.loss(stack_->encode(x), labels);
}

// ---------------------------------------------------------------------------

PretrainResult pretrain(AutoencoderStack& stack, std::span<const Vector> inputs,
                        const nn::TrainConfig& config, PretrainMode mode) {
  if (inputs.empty()) throw PreconditionError("pretrain needs at least one input");
  for (const auto& x : inputs) {
    if (static_cast<std::size_t>(x.size()) != stack.input_dim()) {
      throw ShapeError("pretrain input has dimension " + std::to_string(x.size()) +
                       ", stack expects " + std::to_string(stack.input_dim()));
    }
  }
  PretrainResult result;
  const std::size_t depth = stack.depth();

  if (mode == PretrainMode::joint) {
    std::vector<nn::DenseLayer*> encs, decs;
    for (auto& e : stack.encoders) encs.push_back(&e);
    for (auto& d : stack.decoders) decs.push_back(&d);
    ReconstructionModel model(encs, decs);
    result.layers.push_back(nn::train_epochs<ReconstructionModel, Vector>(model, inputs, config));
    return result;
  }

  std::vector<Vector> current(inputs.begin(), inputs.end());
  for (std::size_t l = 0; l < depth; ++l) {
    ReconstructionModel model({&stack.encoders[l]}, {&stack.decoders[depth - 1 - l]});
    nn::TrainConfig layer_config = config;
    layer_config.seed = hash_combine(config.seed, l);
    result.layers.push_back(
        nn::train_epochs<ReconstructionModel, Vector>(model, std::span<const Vector>(current), layer_config));
    if (l + 1 < depth) {
      for (auto& v : current) v = stack.encoders[l].forward(v);
    }
  }
  return result;
}

nn::TrainHistory fine_tune(AutoencoderStack& stack, std::span<const LabeledVector> data,
                           const nn::TrainConfig& config) {
  for (const auto& s : data) {
    if (static_cast<std::size_t>(s.x.size()) != stack.input_dim()) {
      throw ShapeError("fine_tune input dimension mismatch");
    }
    if (s.label < 0 || static_cast<std::size_t>(s.label) >= stack.head.classes()) {
      throw PreconditionError("label out of range");
    }
  }
  ClassifierModel model(stack);
  return nn::train_epochs<ClassifierModel, LabeledVector>(model, data, config);
}

Vector predict(const AutoencoderStack& stack, const Vector& x) {
  if (static_cast<std::size_t>(x.size()) != stack.input_dim()) {
    throw ShapeError("predict input dimension mismatch");
  }
  return nn::softmax_columns(stack.head.logits(stack.encode(x)));
}

Matrix predict_batch(const AutoencoderStack& stack, const Matrix& x) {
  if (static_cast<std::size_t>(x.rows()) != stack.input_dim()) {
    throw ShapeError("predict input dimension mismatch");
  }
  return nn::softmax_columns(stack.head.logits(stack.encode(x)));
}

Checkpoint to_checkpoint(const AutoencoderStack& stack, std::uint64_t config_hash) {
  Checkpoint cp;
  cp.kind = "dae";
  cp.config_hash = config_hash;
  cp.add_meta("depth", std::to_string(stack.depth()));
  for (std::size_t l = 0; l < stack.depth(); ++l) {
    const auto tag = std::to_string(l);
    cp.add_meta("encoder" + tag + ".activation", activation_name(stack.encoders[l].activation));
    cp.add_meta("decoder" + tag + ".activation", activation_name(stack.decoders[l].activation));
    cp.add_tensor("encoder" + tag + ".weights", stack.encoders[l].weights);
    cp.add_tensor("encoder" + tag + ".bias", stack.encoders[l].bias);
    cp.add_tensor("decoder" + tag + ".weights", stack.decoders[l].weights);
    cp.add_tensor("decoder" + tag + ".bias", stack.decoders[l].bias);
  }
  cp.add_tensor("head.weights", stack.head.weights);
  cp.add_tensor("head.bias", stack.head.bias);
  return cp;
}

AutoencoderStack from_checkpoint(const Checkpoint& cp) {
  if (cp.kind != "dae") throw Error("checkpoint kind '" + cp.kind + "' is not a dae");
  AutoencoderStack stack;
  const auto depth = std::stoul(cp.meta_value("depth"));
  auto layer = [&](const std::string& name) {
    const Matrix w = cp.tensor(name + ".weights");
    nn::DenseLayer d(static_cast<std::size_t>(w.cols()), static_cast<std::size_t>(w.rows()),
                     nn::parse_activation(cp.meta_value(name + ".activation")));
    d.weights = w;
    d.bias = cp.tensor(name + ".bias").col(0);
    return d;
  };
  for (std::size_t l = 0; l < depth; ++l) {
    stack.encoders.push_back(layer("encoder" + std::to_string(l)));
    stack.decoders.push_back(layer("decoder" + std::to_string(l)));
  }
  const Matrix hw = cp.tensor("head.weights");
  stack.head = nn::SoftmaxHead(static_cast<std::size_t>(hw.cols()), static_cast<std::size_t>(hw.rows()));
  stack.head.weights = hw;
  stack.head.bias = cp.tensor("head.bias").col(0);
  if (!stack.mirror_shapes_ok()) throw Error("checkpoint layer shapes are inconsistent");
  return stack;
}

}  // namespace signet::dae
