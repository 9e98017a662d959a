#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "signet/checkpoint.hpp"
#include "signet/features.hpp"
#include "signet/nn.hpp"

namespace signet::cnn {

using nn::Matrix;
using nn::Vector;

/// One convolution filter spanning `width` consecutive rows of the input.
struct Filter {
  std::size_t width = 1;
  RowMatrix weights;  // width x cols
  double bias = 0.0;
};

struct CnnConfig {
  std::vector<std::size_t> widths = {1, 2, 3};
  /// Total filter count q, split evenly across widths.
  std::size_t filters = 300;
  nn::Activation activation = nn::Activation::relu;
  std::size_t classes = 2;
};

struct LabeledMatrix {
  RowMatrix x;
  int label = 0;
};

/// Filters sharing a width, stored as one matrix whose row f is the row-major
/// flattening of filter f's width x cols weights.
struct FilterGroup {
  std::size_t width = 1;
  Matrix weights;
  Vector bias;
  Matrix grad_weights;
  Vector grad_bias;
};

/// Filter bank over (rows x cols) inputs followed by average pooling and a softmax
/// head on the pooled vector z (length q). Filter index order is group order, then
/// position within the group.
class ConvFilterBank {
 public:
  ConvFilterBank() = default;
  ConvFilterBank(std::size_t rows, std::size_t cols, const CnnConfig& config, std::uint64_t seed);

  /// Single-row bank for adjacency rows: q filters of shape 1 x n.
  static ConvFilterBank for_adjacency(std::size_t n, std::size_t filters, nn::Activation activation,
                                      std::uint64_t seed, std::size_t classes = 2);

  std::size_t input_rows() const noexcept { return rows_; }
  std::size_t input_cols() const noexcept { return cols_; }
  std::size_t filter_count() const;
  Filter filter(std::size_t index) const;

  /// Pooled representation z of one input.
  Vector pooled(const RowMatrix& x) const;
  /// Smallest |pre-activation| over every filter window; used to avoid relu kinks.
  double min_abs_preactivation(const RowMatrix& x) const;

  std::vector<FilterGroup> groups;
  nn::Activation activation = nn::Activation::relu;
  nn::SoftmaxHead head;

 private:
  friend class ConvModel;
  void check_input(const RowMatrix& x) const;

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
};

/// h_j = sigma(<W, X[j .. j+m-1]> + b) for j over all 2s-m+2 window positions.
/// Throws ShapeError if the filter is wider than the input or columns disagree.
Vector convolve(const Filter& filter, const RowMatrix& x, nn::Activation activation);

/// Mean of h; h must be non-empty.
double average_pool(const Vector& h);

/// Class probabilities for one (rows x cols) input.
Vector forward(const ConvFilterBank& bank, const RowMatrix& x);

/// Treats an adjacency row as a 1 x n input; each filter sees one window.
Vector adjacency_mode_forward(const ConvFilterBank& bank, const Vector& row);

/// Cross-entropy through the head, pooling and every filter.
class ConvModel {
 public:
  explicit ConvModel(ConvFilterBank& bank) : bank_(&bank) {}

  std::vector<nn::ParamBlock> parameters();
  double accumulate_gradient(std::span<const LabeledMatrix* const> batch);
  double total_loss(std::span<const LabeledMatrix* const> batch) const;

 private:
  ConvFilterBank* bank_;
};

nn::TrainHistory train(ConvFilterBank& bank, std::span<const LabeledMatrix> data,
                       const nn::TrainConfig& config);

Checkpoint to_checkpoint(const ConvFilterBank& bank, std::uint64_t config_hash);
ConvFilterBank from_checkpoint(const Checkpoint& checkpoint);

}  // namespace signet::cnn
