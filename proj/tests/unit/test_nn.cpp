#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "signet/dae.hpp"
#include "signet/error.hpp"
#include "signet/nn.hpp"

using namespace signet;
using namespace signet::nn;

namespace {

struct Point {
  Vector x;
  int label = 0;
};

// One hidden layer and a softmax head, enough to exercise the generic trainer.
struct TinyNet {
  DenseLayer hidden;
  SoftmaxHead head;

  TinyNet(std::size_t in, std::size_t width, Activation act, std::uint64_t seed)
      : hidden(in, width, act), head(width, 2) {
    Rng rng(seed);
    hidden.initialize(rng);
    head.initialize(rng);
  }

  std::vector<ParamBlock> parameters() {
    std::vector<ParamBlock> out;
    hidden.append_parameters(out, "hidden");
    head.append_parameters(out, "head");
    return out;
  }

  static Matrix stack(std::span<const Point* const> batch, std::vector<int>& labels) {
    Matrix x(batch.front()->x.size(), static_cast<Eigen::Index>(batch.size()));
    labels.clear();
    for (std::size_t j = 0; j < batch.size(); ++j) {
      x.col(static_cast<Eigen::Index>(j)) = batch[j]->x;
      labels.push_back(batch[j]->label);
    }
    return x;
  }

  double accumulate_gradient(std::span<const Point* const> batch) {
    std::vector<int> labels;
    const Matrix x = stack(batch, labels);
    DenseLayer::Cache cache;
    const Matrix h = hidden.forward(x, cache);
    Matrix probs;
    const double loss = head.loss(h, labels, &probs);
    hidden.backward(cache, head.backward(h, probs, labels));
    return loss;
  }

  double total_loss(std::span<const Point* const> batch) const {
    std::vector<int> labels;
    const Matrix x = stack(batch, labels);
    return head.loss(hidden.forward(x), labels);
  }

  int predict(const Vector& x) const {
    return static_cast<int>(argmax(softmax_columns(head.logits(hidden.forward(x))).col(0)));
  }
};

std::vector<Point> separable(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> noise(0.0, 0.3);
  std::vector<Point> out;
  for (std::size_t i = 0; i < n; ++i) {
    const int c = static_cast<int>(i % 2);
    Vector x(2);
    x << (c ? 2.0 : -2.0) + noise(gen), noise(gen);
    out.push_back({x, c});
  }
  return out;
}

}  // namespace

TEST(Softmax, ZeroHeadIsUniform) {
  SoftmaxHead head(4, 3);
  head.weights.setZero();
  head.bias.setZero();
  const Vector p = softmax_predict(head, Vector::Random(4));
  for (Eigen::Index c = 0; c < 3; ++c) EXPECT_NEAR(p[c], 1.0 / 3.0, 1e-15);
}

TEST(Softmax, ShiftInvariance) {
  const Vector z = Vector::Random(5);
  const Vector shifted = (z.array() + 123.25).matrix();
  EXPECT_LE((softmax(z) - softmax(shifted)).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_NEAR(softmax(z).sum(), 1.0, 1e-12);
}

TEST(Softmax, LargeLogitsAgainstExtendedPrecision) {
  Vector z(2);
  z << 1000.0, 0.0;
  const Vector p = softmax(z);
  const long double tail = std::exp(-1000.0L);
  const long double p1 = 1.0L / (1.0L + tail);
  EXPECT_TRUE(std::isfinite(p[0]) && std::isfinite(p[1]));
  EXPECT_NEAR(p[0], static_cast<double>(p1), 1e-15);
  EXPECT_NEAR(p[1], static_cast<double>(tail * p1), 1e-300);
}

TEST(CrossEntropy, Cases) {
  Vector certain(2), uniform(2);
  certain << 0.0, 1.0;
  uniform << 0.5, 0.5;
  const Vector a[] = {certain};
  const int one[] = {1};
  EXPECT_EQ(cross_entropy(a, one), 0.0);
  const Vector b[] = {uniform};
  EXPECT_NEAR(cross_entropy(b, one), std::log(2.0), 1e-15);
}

TEST(CrossEntropy, MatchesScalarLoop) {
  std::mt19937_64 gen(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Vector> preds;
  std::vector<int> labels;
  for (int i = 0; i < 50; ++i) {
    Vector p(3);
    p << u(gen), u(gen), u(gen);
    p /= p.sum();
    if (i == 7) p << 0.0, 0.5, 0.5;  // exercises the clamp
    preds.push_back(p);
    labels.push_back(i % 3);
  }
  double want = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) want -= std::log(std::max(preds[i][labels[i]], 1e-12));
  want /= static_cast<double>(preds.size());
  EXPECT_NEAR(cross_entropy(preds, labels), want, 1e-12);
}

TEST(SoftmaxHead, LossMatchesCrossEntropy) {
  SoftmaxHead head(3, 2);
  Rng rng(2);
  head.initialize(rng);
  const Matrix z = Matrix::Random(3, 6);
  const std::vector<int> labels = {0, 1, 1, 0, 1, 0};
  Matrix probs;
  const double summed = head.loss(z, labels, &probs);
  std::vector<Vector> cols;
  for (Eigen::Index j = 0; j < z.cols(); ++j) cols.push_back(probs.col(j));
  EXPECT_NEAR(summed / 6.0, cross_entropy(cols, labels), 1e-12);
}

TEST(GradCheck, LinearSquaredLossIsExact) {
  DenseLayer layer(4, 4, Activation::linear);
  Rng rng(1);
  layer.initialize(rng);
  dae::ReconstructionModel model({&layer}, {});
  const Vector x = Vector::Random(4);
  EXPECT_LE(grad_check(model, x, 1e-4), 1e-9);
}

TEST(GradCheck, TanhNet) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    TinyNet net(3, 6, Activation::tanh, seed);
    const Point p{Vector::Random(3), static_cast<int>(seed % 2)};
    EXPECT_LE(grad_check(net, p, 1e-5), 1e-4);
  }
}

TEST(GradCheck, ReluNetAwayFromKinks) {
  std::mt19937_64 gen(9);
  std::normal_distribution<double> normal;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    TinyNet net(3, 6, Activation::relu, seed);
    Point p{Vector(3), 1};
    // resample until no hidden pre-activation lies within 1e-3 of the kink
    do {
      for (Eigen::Index i = 0; i < 3; ++i) p.x[i] = normal(gen);
    } while (((net.hidden.weights * p.x + net.hidden.bias).cwiseAbs().array() < 1e-3).any());
    EXPECT_LE(grad_check(net, p, 1e-6), 1e-4);
  }
}

TEST(GradCheck, RejectsBadEps) {
  TinyNet net(2, 2, Activation::tanh, 1);
  const Point p{Vector::Zero(2), 0};
  EXPECT_THROW(grad_check(net, p, 0.0), PreconditionError);
}

TEST(Train, ZeroLearningRateKeepsParameters) {
  TinyNet net(2, 4, Activation::tanh, 3);
  const Matrix before = net.hidden.weights;
  const auto data = separable(20, 1);
  TrainConfig c;
  c.learning_rate = 0.0;
  c.epochs = 5;
  c.early_stop_patience = 100;
  const auto h = train_epochs<TinyNet, Point>(net, data, c);
  EXPECT_EQ(net.hidden.weights, before);
  // the training slice is reshuffled every epoch, so only summation order changes
  for (double l : h.train_loss) EXPECT_NEAR(l, h.train_loss.front(), 1e-14);
}

TEST(Train, DeterministicHistories) {
  const auto data = separable(40, 2);
  TrainConfig c;
  c.learning_rate = 0.01;
  c.epochs = 10;
  TinyNet a(2, 4, Activation::tanh, 5), b(2, 4, Activation::tanh, 5);
  const auto ha = train_epochs<TinyNet, Point>(a, data, c);
  const auto hb = train_epochs<TinyNet, Point>(b, data, c);
  EXPECT_EQ(ha.train_loss, hb.train_loss);
  EXPECT_EQ(ha.validation_loss, hb.validation_loss);
  EXPECT_EQ(a.hidden.weights, b.hidden.weights);
}

TEST(Train, SeparableToySetReachesFullAccuracy) {
  const auto data = separable(20, 3);
  TrainConfig c;
  c.learning_rate = 0.05;
  c.batch_size = 4;
  c.validation_fraction = 0.0;
  TinyNet net(2, 4, Activation::tanh, 7);
  const auto h = train_epochs<TinyNet, Point>(net, data, c);
  EXPECT_LE(h.epochs_run, 30u);
  for (const auto& p : data) EXPECT_EQ(net.predict(p.x), p.label);
}

TEST(Train, EarlyStoppingRestoresBestParameters) {
  const auto data = separable(40, 4);
  TrainConfig c;
  c.learning_rate = 0.5;
  c.optimizer = OptimizerKind::sgd;
  c.epochs = 30;
  c.early_stop_patience = 2;
  TinyNet net(2, 4, Activation::tanh, 2);
  const auto h = train_epochs<TinyNet, Point>(net, data, c);
  ASSERT_FALSE(h.validation_loss.empty());
  const double best = *std::min_element(h.validation_loss.begin(), h.validation_loss.end());
  EXPECT_EQ(h.validation_loss[h.best_epoch], best);
}

TEST(Train, DivergenceIsReported) {
  auto data = separable(10, 5);
  data[3].x[0] = std::numeric_limits<double>::infinity();
  TrainConfig c;
  c.validation_fraction = 0.0;
  TinyNet net(2, 4, Activation::tanh, 1);
  EXPECT_THROW((train_epochs<TinyNet, Point>(net, data, c)), DivergenceError);
}

TEST(TrainConfig, Validation) {
  TrainConfig c;
  c.validation_fraction = 0.5;
  EXPECT_THROW(c.validate(), PreconditionError);
  c.validation_fraction = 0.1;
  c.epochs = 0;
  EXPECT_THROW(c.validate(), PreconditionError);
}

TEST(Activation, Names) {
  for (auto a : {Activation::tanh, Activation::relu, Activation::linear}) EXPECT_EQ(parse_activation(to_string(a)), a);
  EXPECT_EQ(activate(Activation::relu, -2.0), 0.0);
  EXPECT_NEAR(activation_derivative(Activation::tanh, 0.3, std::tanh(0.3)), 1 - std::tanh(0.3) * std::tanh(0.3), 1e-15);
}
