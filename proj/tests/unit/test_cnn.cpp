#include <filesystem>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "signet/cnn.hpp"
#include "signet/error.hpp"

using namespace signet;
using namespace signet::cnn;

namespace {

CnnConfig config(std::vector<std::size_t> widths, std::size_t filters) {
  CnnConfig c;
  c.widths = std::move(widths);
  c.filters = filters;
  return c;
}

RowMatrix random_input(std::size_t rows, std::size_t cols, std::mt19937_64& gen) {
  std::normal_distribution<double> normal;
  RowMatrix x(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = normal(gen);
  return x;
}

double window_dot(const Filter& f, const RowMatrix& x, Eigen::Index j) {
  double acc = 0.0;
  for (std::size_t r = 0; r < f.width; ++r)
    for (Eigen::Index c = 0; c < x.cols(); ++c) acc += f.weights(static_cast<Eigen::Index>(r), c) * x(j + static_cast<Eigen::Index>(r), c);
  return acc + f.bias;
}

}  // namespace

TEST(Convolve, OutputLengths) {
  std::mt19937_64 gen(1);
  for (std::size_t s : {1u, 2u}) {
    for (std::size_t k : {10u, 30u}) {
      const auto x = random_input(2 * s + 1, k, gen);
      for (std::size_t m = 1; m <= 2 * s + 1; ++m) {
        Filter f{m, RowMatrix::Ones(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(k)), 0.0};
        EXPECT_EQ(static_cast<std::size_t>(convolve(f, x, nn::Activation::relu).size()), 2 * s - m + 2);
      }
      Filter wide{2 * s + 2, RowMatrix::Ones(static_cast<Eigen::Index>(2 * s + 2), static_cast<Eigen::Index>(k)), 0.0};
      EXPECT_THROW(convolve(wide, x, nn::Activation::relu), ShapeError);
    }
  }
}

TEST(Convolve, ZeroFilterAndScalarOracle) {
  std::mt19937_64 gen(2);
  const auto x = random_input(3, 5, gen);
  const Filter zero{2, RowMatrix::Zero(2, 5), 0.0};
  EXPECT_EQ(convolve(zero, x, nn::Activation::relu), Vector::Zero(2));
  const Filter full{3, random_input(3, 5, gen), 0.25};
  const Vector h = convolve(full, x, nn::Activation::tanh);
  ASSERT_EQ(h.size(), 1);
  EXPECT_NEAR(h[0], std::tanh(window_dot(full, x, 0)), 1e-14);
  const Filter two{2, random_input(2, 5, gen), -0.1};
  const Vector h2 = convolve(two, x, nn::Activation::linear);
  for (Eigen::Index j = 0; j < 2; ++j) EXPECT_NEAR(h2[j], window_dot(two, x, j), 1e-13);
}

TEST(AveragePool, Cases) {
  Vector h(2);
  h << 2, 4;
  EXPECT_EQ(average_pool(h), 3.0);
  EXPECT_EQ(average_pool(Vector::Constant(1, 7.5)), 7.5);
  const Vector r = Vector::Random(7);
  double sum = 0.0;
  for (Eigen::Index i = 0; i < 7; ++i) sum += r[i];
  EXPECT_NEAR(average_pool(r), sum / 7.0, 1e-15);
  EXPECT_THROW(average_pool(Vector()), PreconditionError);
}

TEST(FilterBank, PooledMatchesFilterByFilter) {
  std::mt19937_64 gen(3);
  const ConvFilterBank bank(3, 6, config({1, 2, 3}, 3), 4);
  ASSERT_EQ(bank.filter_count(), 3u);
  const auto x = random_input(3, 6, gen);
  const Vector z = bank.pooled(x);
  ASSERT_EQ(z.size(), 3);
  for (std::size_t f = 0; f < 3; ++f) {
    EXPECT_NEAR(z[static_cast<Eigen::Index>(f)], average_pool(convolve(bank.filter(f), x, bank.activation)), 1e-13);
  }
}

TEST(FilterBank, DefaultShape) {
  const ConvFilterBank bank(3, 30, CnnConfig{}, 1);
  EXPECT_EQ(bank.filter_count(), 300u);
  ASSERT_EQ(bank.groups.size(), 3u);
  for (const auto& g : bank.groups) EXPECT_EQ(g.weights.rows(), 100);
  std::mt19937_64 gen(4);
  EXPECT_EQ(bank.pooled(random_input(3, 30, gen)).size(), 300);
}

TEST(FilterBank, ConfigPreconditions) {
  EXPECT_THROW(ConvFilterBank(3, 4, config({1, 2}, 3), 1), PreconditionError);
  EXPECT_THROW(ConvFilterBank(3, 4, config({4}, 2), 1), PreconditionError);
  const ConvFilterBank bank(3, 4, config({1}, 2), 1);
  std::mt19937_64 gen(1);
  EXPECT_THROW(bank.pooled(random_input(3, 5, gen)), ShapeError);
}

TEST(FilterBank, DuplicateFiltersGiveDuplicateFeatures) {
  ConvFilterBank bank(3, 4, config({2}, 2), 5);
  bank.groups[0].weights.row(1) = bank.groups[0].weights.row(0);
  bank.groups[0].bias[1] = bank.groups[0].bias[0];
  std::mt19937_64 gen(5);
  const Vector z = bank.pooled(random_input(3, 4, gen));
  EXPECT_EQ(z[0], z[1]);
}

TEST(FilterBank, PermutingFiltersPermutesFeatures) {
  std::mt19937_64 gen(6);
  const ConvFilterBank bank(3, 4, config({1, 3}, 8), 6);
  ConvFilterBank swapped = bank;
  std::swap(swapped.groups[0], swapped.groups[1]);
  const auto x = random_input(3, 4, gen);
  const Vector a = bank.pooled(x);
  const Vector b = swapped.pooled(x);
  EXPECT_EQ(a.head(4), b.tail(4));
  EXPECT_EQ(a.tail(4), b.head(4));
  swapped.head.weights.leftCols(4) = bank.head.weights.rightCols(4);
  swapped.head.weights.rightCols(4) = bank.head.weights.leftCols(4);
  EXPECT_LE((forward(swapped, x) - forward(bank, x)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(AdjacencyMode, SingleWindowAndDenseEquivalence) {
  const std::size_t n = 25, q = 6;
  auto bank = ConvFilterBank::for_adjacency(n, q, nn::Activation::relu, 3);
  EXPECT_EQ(bank.filter_count(), q);
  // zero row, zero bias -> z = relu(0) in every slot
  for (auto& g : bank.groups) g.bias.setZero();
  EXPECT_EQ(bank.pooled(RowMatrix::Zero(1, n)), Vector::Zero(q));
  std::mt19937_64 gen(7);
  std::uniform_int_distribution<int> pick(-1, 1);
  Vector row(n);
  for (Eigen::Index i = 0; i < row.size(); ++i) row[i] = pick(gen);
  for (auto& g : bank.groups) g.bias = Vector::Random(static_cast<Eigen::Index>(q));
  nn::DenseLayer dense(n, q, nn::Activation::relu);
  dense.weights = bank.groups[0].weights;
  dense.bias = bank.groups[0].bias;
  const Vector want = nn::softmax_columns(bank.head.logits(dense.forward(row)));
  EXPECT_LE((adjacency_mode_forward(bank, row) - want).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_THROW(adjacency_mode_forward(bank, Vector::Zero(n + 1)), ShapeError);
}

TEST(GradCheck, CnnLossAllWidths) {
  std::mt19937_64 gen(8);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    ConvFilterBank bank(3, 4, config({1, 2, 3}, 6), seed);
    for (auto& g : bank.groups) g.bias = Vector::Random(g.bias.size()) * 0.1;
    LabeledMatrix s{random_input(3, 4, gen), static_cast<int>(seed % 2)};
    while (bank.min_abs_preactivation(s.x) < 1e-3) s.x = random_input(3, 4, gen);
    ConvModel model(bank);
    EXPECT_LE(nn::grad_check(model, s, 1e-6), 1e-4);
  }
}

TEST(Train, SingleClassLabels) {
  std::mt19937_64 gen(9);
  ConvFilterBank bank(3, 5, config({1, 2, 3}, 6), 2);
  std::vector<LabeledMatrix> data;
  for (int i = 0; i < 30; ++i) data.push_back({random_input(3, 5, gen), 0});
  nn::TrainConfig c;
  c.learning_rate = 0.02;
  c.epochs = 100;
  c.validation_fraction = 0.0;
  c.early_stop_patience = 100;
  const auto h = train(bank, data, c);
  EXPECT_LT(h.train_loss.back(), 0.02);
  EXPECT_EQ(nn::argmax(forward(bank, random_input(3, 5, gen))), 0u);
}

TEST(Checkpoint, RoundTrip) {
  std::mt19937_64 gen(10);
  const ConvFilterBank bank(5, 4, config({1, 2, 3, 4, 5}, 10), 3);
  const auto path = std::filesystem::temp_directory_path() / "signet_cnn.ckpt";
  write_checkpoint(to_checkpoint(bank, 7), path);
  const auto restored = from_checkpoint(read_checkpoint(path));
  for (int i = 0; i < 10; ++i) {
    const auto x = random_input(5, 4, gen);
    EXPECT_EQ(forward(restored, x), forward(bank, x));
  }
}
