#include "signet/cnn.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "signet/error.hpp"

namespace signet::cnn {

namespace {

using WindowMap = Eigen::Map<const Matrix, 0, Eigen::OuterStride<>>;

// Column j is the flattened window of rows j .. j+width-1 (windows overlap in memory).
WindowMap windows(const RowMatrix& x, std::size_t width) {
  const auto cols = x.cols();
  const auto positions = x.rows() - static_cast<Eigen::Index>(width) + 1;
  return WindowMap(x.data(), static_cast<Eigen::Index>(width) * cols, positions,
                   Eigen::OuterStride<>(cols));
}

Matrix group_preactivation(const FilterGroup& g, const RowMatrix& x) {
  Matrix pre = g.weights * windows(x, g.width);
  pre.colwise() += g.bias;
  return pre;
}

}  // namespace

ConvFilterBank::ConvFilterBank(std::size_t rows, std::size_t cols, const CnnConfig& config,
                               std::uint64_t seed)
    : activation(config.activation), rows_(rows), cols_(cols) {
  if (rows == 0 || cols == 0) throw PreconditionError("CNN input must be non-empty");
  if (config.widths.empty()) throw PreconditionError("CNN needs at least one filter width");
  if (config.filters == 0 || config.filters % config.widths.size() != 0) {
    throw PreconditionError("filter count " + std::to_string(config.filters) +
                            " must be a positive multiple of the number of widths");
  }
  const std::size_t per_width = config.filters / config.widths.size();
  Rng rng(seed);
  for (const std::size_t m : config.widths) {
    if (m < 1 || m > rows) {
      throw PreconditionError("filter width " + std::to_string(m) + " exceeds input rows " +
                              std::to_string(rows));
    }
    FilterGroup g;
    g.width = m;
    const auto flat = static_cast<Eigen::Index>(m * cols);
    g.weights.resize(static_cast<Eigen::Index>(per_width), flat);
    for (Eigen::Index f = 0; f < g.weights.rows(); ++f) {
      Vector w(flat);
      nn::glorot_uniform({w.data(), static_cast<std::size_t>(flat)}, m * cols, 1, rng);
      g.weights.row(f) = w.transpose();
    }
    g.bias = Vector::Zero(static_cast<Eigen::Index>(per_width));
    g.grad_weights = Matrix::Zero(g.weights.rows(), g.weights.cols());
    g.grad_bias = Vector::Zero(g.bias.size());
    groups.push_back(std::move(g));
  }
  head = nn::SoftmaxHead(config.filters, config.classes);
  head.initialize(rng);
}

ConvFilterBank ConvFilterBank::for_adjacency(std::size_t n, std::size_t filters,
                                             nn::Activation activation, std::uint64_t seed,
                                             std::size_t classes) {
  CnnConfig config;
  config.widths = {1};
  config.filters = filters;
  config.activation = activation;
  config.classes = classes;
  return ConvFilterBank(1, n, config, seed);
}

std::size_t ConvFilterBank::filter_count() const {
  std::size_t q = 0;
  for (const auto& g : groups) q += static_cast<std::size_t>(g.weights.rows());
  return q;
}

Filter ConvFilterBank::filter(std::size_t index) const {
  for (const auto& g : groups) {
    const auto count = static_cast<std::size_t>(g.weights.rows());
    if (index < count) {
      Filter f;
      f.width = g.width;
      f.weights = RowMatrix(static_cast<Eigen::Index>(g.width), static_cast<Eigen::Index>(cols_));
      for (std::size_t r = 0; r < g.width; ++r) {
        for (std::size_t c = 0; c < cols_; ++c) {
          f.weights(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
              g.weights(static_cast<Eigen::Index>(index), static_cast<Eigen::Index>(r * cols_ + c));
        }
      }
      f.bias = g.bias[static_cast<Eigen::Index>(index)];
      return f;
    }
    index -= count;
  }
  throw PreconditionError("filter index out of range");
}

void ConvFilterBank::check_input(const RowMatrix& x) const {
  if (static_cast<std::size_t>(x.rows()) != rows_ || static_cast<std::size_t>(x.cols()) != cols_) {
    throw ShapeError("CNN expects a " + std::to_string(rows_) + "x" + std::to_string(cols_) +
                     " input, got " + std::to_string(x.rows()) + "x" + std::to_string(x.cols()));
  }
}

Vector ConvFilterBank::pooled(const RowMatrix& x) const {
  check_input(x);
  Vector z(static_cast<Eigen::Index>(filter_count()));
  Eigen::Index offset = 0;
  for (const auto& g : groups) {
    const Matrix h = nn::activate(activation, group_preactivation(g, x));
    z.segment(offset, h.rows()) = h.rowwise().mean();
    offset += h.rows();
  }
  return z;
}

double ConvFilterBank::min_abs_preactivation(const RowMatrix& x) const {
  check_input(x);
  double best = std::numeric_limits<double>::infinity();
  for (const auto& g : groups) best = std::min(best, group_preactivation(g, x).cwiseAbs().minCoeff());
  return best;
}

Vector convolve(const Filter& filter, const RowMatrix& x, nn::Activation activation) {
  if (filter.width < 1 || filter.width > static_cast<std::size_t>(x.rows())) {
    throw ShapeError("filter width " + std::to_string(filter.width) + " exceeds input rows " +
                     std::to_string(x.rows()));
  }
  if (filter.weights.cols() != x.cols() ||
      static_cast<std::size_t>(filter.weights.rows()) != filter.width) {
    throw ShapeError("filter shape does not match input columns");
  }
  const auto positions = x.rows() - static_cast<Eigen::Index>(filter.width) + 1;
  Vector h(positions);
  for (Eigen::Index j = 0; j < positions; ++j) {
    const double pre =
        (filter.weights.array() * x.middleRows(j, static_cast<Eigen::Index>(filter.width)).array()).sum() +
        filter.bias;
    h[j] = nn::activate(activation, pre);
  }
  return h;
}

double average_pool(const Vector& h) {
  if (h.size() == 0) throw PreconditionError("average_pool needs a non-empty vector");
  return h.mean();
}

Vector forward(const ConvFilterBank& bank, const RowMatrix& x) {
  return nn::softmax_columns(bank.head.logits(bank.pooled(x)));
}

Vector adjacency_mode_forward(const ConvFilterBank& bank, const Vector& row) {
  if (bank.input_rows() != 1) throw ShapeError("adjacency mode needs a single-row filter bank");
  if (static_cast<std::size_t>(row.size()) != bank.input_cols()) {
    throw ShapeError("adjacency row length does not match the filter bank");
  }
  const RowMatrix x = Eigen::Map<const RowMatrix>(row.data(), 1, row.size());
  return forward(bank, x);
}

// ---------------------------------------------------------------------------

std::vector<nn::ParamBlock> ConvModel::parameters() {
  std::vector<nn::ParamBlock> out;
  for (std::size_t i = 0; i < bank_->groups.size(); ++i) {
    auto& g = bank_->groups[i];
    const std::string prefix = "conv" + std::to_string(i);
    out.push_back({prefix + ".weights", {g.weights.data(), static_cast<std::size_t>(g.weights.size())},
                   {g.grad_weights.data(), static_cast<std::size_t>(g.grad_weights.size())}});
    out.push_back({prefix + ".bias", {g.bias.data(), static_cast<std::size_t>(g.bias.size())},
                   {g.grad_bias.data(), static_cast<std::size_t>(g.grad_bias.size())}});
  }
  bank_->head.append_parameters(out, "head");
  return out;
}

double ConvModel::accumulate_gradient(std::span<const LabeledMatrix* const> batch) {
  auto& bank = *bank_;
  const auto q = static_cast<Eigen::Index>(bank.filter_count());
  const auto b = static_cast<Eigen::Index>(batch.size());
  Matrix z(q, b);
  std::vector<int> labels(batch.size());
  // pre-activations per sample and group, reused in the backward pass
  std::vector<std::vector<Matrix>> pre(batch.size());
  for (Eigen::Index j = 0; j < b; ++j) {
    const auto& sample = *batch[static_cast<std::size_t>(j)];
    bank.check_input(sample.x);
    labels[static_cast<std::size_t>(j)] = sample.label;
    Eigen::Index offset = 0;
    for (const auto& g : bank.groups) {
      Matrix p = group_preactivation(g, sample.x);
      z.col(j).segment(offset, p.rows()) = nn::activate(bank.activation, p).rowwise().mean();
      offset += p.rows();
      pre[static_cast<std::size_t>(j)].push_back(std::move(p));
    }
  }
  Matrix probs;
  const double loss = bank.head.loss(z, labels, &probs);
  const Matrix dz = bank.head.backward(z, probs, labels);
  for (Eigen::Index j = 0; j < b; ++j) {
    const auto& sample = *batch[static_cast<std::size_t>(j)];
    Eigen::Index offset = 0;
    for (std::size_t gi = 0; gi < bank.groups.size(); ++gi) {
      auto& g = bank.groups[gi];
      const Matrix& p = pre[static_cast<std::size_t>(j)][gi];
      const auto positions = p.cols();
      Matrix dpre = (dz.col(j).segment(offset, p.rows()) / static_cast<double>(positions)).replicate(1, positions);
      switch (bank.activation) {
        case nn::Activation::relu:
          dpre.array() *= (p.array() > 0.0).cast<double>();
          break;
        case nn::Activation::tanh:
          dpre.array() *= 1.0 - p.array().tanh().square();
          break;
        case nn::Activation::linear:
          break;
      }
      g.grad_weights.noalias() += dpre * windows(sample.x, g.width).transpose();
      g.grad_bias += dpre.rowwise().sum();
      offset += p.rows();
    }
  }
  return loss;
}

double ConvModel::total_loss(std::span<const LabeledMatrix* const> batch) const {
  const auto& bank = *bank_;
  Matrix z(static_cast<Eigen::Index>(bank.filter_count()), static_cast<Eigen::Index>(batch.size()));
  std::vector<int> labels(batch.size());
  for (std::size_t j = 0; j < batch.size(); ++j) {
    z.col(static_cast<Eigen::Index>(j)) = bank.pooled(batch[j]->x);
    labels[j] = batch[j]->label;
  }
  return bank.head.loss(z, labels);
}

nn::TrainHistory train(ConvFilterBank& bank, std::span<const LabeledMatrix> data,
                       const nn::TrainConfig& config) {
  for (const auto& s : data) {
    if (s.label < 0 || static_cast<std::size_t>(s.label) >= bank.head.classes()) {
      throw PreconditionError("label out of range");
    }
  }
  ConvModel model(bank);
  return nn::train_epochs<ConvModel, LabeledMatrix>(model, data, config);
}

Checkpoint to_checkpoint(const ConvFilterBank& bank, std::uint64_t config_hash) {
  Checkpoint cp;
  cp.kind = "cnn";
  cp.config_hash = config_hash;
  cp.add_meta("rows", std::to_string(bank.input_rows()));
  cp.add_meta("cols", std::to_string(bank.input_cols()));
  cp.add_meta("activation", std::string(nn::to_string(bank.activation)));
  cp.add_meta("groups", std::to_string(bank.groups.size()));
  for (std::size_t i = 0; i < bank.groups.size(); ++i) {
    const auto tag = "conv" + std::to_string(i);
    cp.add_meta(tag + ".width", std::to_string(bank.groups[i].width));
    cp.add_tensor(tag + ".weights", bank.groups[i].weights);
    cp.add_tensor(tag + ".bias", bank.groups[i].bias);
  }
  cp.add_tensor("head.weights", bank.head.weights);
  cp.add_tensor("head.bias", bank.head.bias);
  return cp;
}

ConvFilterBank from_checkpoint(const Checkpoint& cp) {
  if (cp.kind != "cnn") throw Error("checkpoint kind '" + cp.kind + "' is not a cnn");
  const auto rows = std::stoul(cp.meta_value("rows"));
  const auto cols = std::stoul(cp.meta_value("cols"));
  const auto count = std::stoul(cp.meta_value("groups"));
  CnnConfig config;
  config.widths.clear();
  std::vector<Matrix> weights;
  std::vector<Vector> biases;
  for (std::size_t i = 0; i < count; ++i) {
    const auto tag = "conv" + std::to_string(i);
    config.widths.push_back(std::stoul(cp.meta_value(tag + ".width")));
    weights.push_back(cp.tensor(tag + ".weights"));
    biases.push_back(cp.tensor(tag + ".bias").col(0));
  }
  const Matrix hw = cp.tensor("head.weights");
  config.filters = static_cast<std::size_t>(hw.cols());
  config.classes = static_cast<std::size_t>(hw.rows());
  config.activation = nn::parse_activation(cp.meta_value("activation"));
  ConvFilterBank bank(rows, cols, config, 0);
  for (std::size_t i = 0; i < count; ++i) {
    if (weights[i].rows() != bank.groups[i].weights.rows() ||
        weights[i].cols() != bank.groups[i].weights.cols()) {
      throw Error("checkpoint filter group shapes are inconsistent");
    }
    bank.groups[i].weights = weights[i];
    bank.groups[i].bias = biases[i];
  }
  bank.head.weights = hw;
  bank.head.bias = cp.tensor("head.bias").col(0);
  return bank;
}

}  // namespace signet::cnn
