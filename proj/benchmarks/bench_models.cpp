#include <random>

#include <benchmark/benchmark.h>

#include "signet/cnn.hpp"
#include "signet/dae.hpp"

using namespace signet;

namespace {

nn::TrainConfig one_epoch(std::size_t batch) {
  nn::TrainConfig c;
  c.epochs = 1;
  c.batch_size = batch;
  c.validation_fraction = 0.0;
  return c;
}

}  // namespace

// One fine-tuning epoch over 400 labeled nodes (20% of the default synthetic graph).
static void BM_DaeFineTuneEpoch(benchmark::State& state) {
  std::mt19937_64 gen(1);
  std::normal_distribution<double> normal;
  std::vector<dae::LabeledVector> data(400);
  for (std::size_t i = 0; i < data.size(); ++i) {
    data[i].x = nn::Vector::NullaryExpr(90, [&] { return normal(gen); });
    data[i].label = static_cast<int>(i % 2);
  }
  dae::AutoencoderStack stack(90, dae::DaeConfig{}, 1);
  const auto cfg = one_epoch(16);
  for (auto _ : state) benchmark::DoNotOptimize(dae::fine_tune(stack, data, cfg));
}
BENCHMARK(BM_DaeFineTuneEpoch)->Unit(benchmark::kMillisecond);

static void BM_DaePretrainEpoch(benchmark::State& state) {
  std::mt19937_64 gen(2);
  std::normal_distribution<double> normal;
  std::vector<nn::Vector> inputs(2000);
  for (auto& x : inputs) x = nn::Vector::NullaryExpr(90, [&] { return normal(gen); });
  dae::AutoencoderStack stack(90, dae::DaeConfig{}, 1);
  const auto cfg = one_epoch(32);
  for (auto _ : state) benchmark::DoNotOptimize(dae::pretrain(stack, inputs, cfg));
}
BENCHMARK(BM_DaePretrainEpoch)->Unit(benchmark::kMillisecond);

static void BM_CnnEpoch(benchmark::State& state) {
  const auto rows = static_cast<std::size_t>(state.range(0));
  const auto cols = static_cast<std::size_t>(state.range(1));
  std::mt19937_64 gen(3);
  std::normal_distribution<double> normal;
  std::vector<cnn::LabeledMatrix> data(400);
  for (std::size_t i = 0; i < data.size(); ++i) {
    data[i].x = RowMatrix::NullaryExpr(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols),
                                       [&] { return normal(gen); });
    data[i].label = static_cast<int>(i % 2);
  }
  auto bank = rows == 1 ? cnn::ConvFilterBank::for_adjacency(cols, 300, nn::Activation::relu, 1)
                        : cnn::ConvFilterBank(rows, cols, cnn::CnnConfig{}, 1);
  const auto cfg = one_epoch(16);
  for (auto _ : state) benchmark::DoNotOptimize(cnn::train(bank, data, cfg));
}
BENCHMARK(BM_CnnEpoch)->Args({3, 30})->Args({5, 30})->Args({1, 2000})->Unit(benchmark::kMillisecond);
