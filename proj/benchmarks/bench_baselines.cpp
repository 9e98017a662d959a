#include <random>

#include <benchmark/benchmark.h>

#include "signet/baselines.hpp"

using namespace signet;

namespace {

struct Data {
  std::vector<Eigen::VectorXd> points;
  std::vector<int> labels;
};

Data blobs(std::size_t n, std::size_t dim) {
  std::mt19937_64 gen(1);
  std::normal_distribution<double> normal;
  Data d;
  for (std::size_t i = 0; i < n; ++i) {
    Eigen::VectorXd x = Eigen::VectorXd::NullaryExpr(static_cast<Eigen::Index>(dim), [&] { return normal(gen); });
    x[0] += i % 2 ? 1.0 : -1.0;
    d.points.push_back(std::move(x));
    d.labels.push_back(static_cast<int>(i % 2));
  }
  return d;
}

}  // namespace

static void BM_SvmTrain(benchmark::State& state) {
  const auto d = blobs(static_cast<std::size_t>(state.range(0)), 90);
  for (auto _ : state) benchmark::DoNotOptimize(svm_train(d.points, d.labels));
}
BENCHMARK(BM_SvmTrain)->Arg(100)->Arg(400)->Unit(benchmark::kMillisecond);

static void BM_KnnPredict(benchmark::State& state) {
  const auto train = blobs(static_cast<std::size_t>(state.range(0)), 90);
  const auto queries = blobs(1600, 90);
  const KnnModel model(train.points, train.labels, 3);
  for (auto _ : state) benchmark::DoNotOptimize(knn_predict(model, queries.points));
}
BENCHMARK(BM_KnnPredict)->Arg(100)->Arg(400)->Unit(benchmark::kMillisecond);
