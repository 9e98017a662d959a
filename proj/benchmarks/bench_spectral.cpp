#include <benchmark/benchmark.h>

#include "signet/features.hpp"
#include "signet/graph.hpp"
#include "signet/spectral.hpp"

using namespace signet;

static void BM_EigenTopK(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto g = generate_planted_graph(n / 2, n / 2, PlantedGraphParams{}, 1);
  EigenOptions o;
  o.k = static_cast<std::size_t>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(eigen_top_k(g, o));
  state.SetLabel(std::to_string(g.edge_count()) + " edges");
}
BENCHMARK(BM_EigenTopK)->Args({2000, 10})->Args({2000, 30})->Args({8000, 30})->Unit(benchmark::kMillisecond);

static void BM_FeatureTable(benchmark::State& state) {
  const auto g = generate_planted_graph(1000, 1000, PlantedGraphParams{}, 1);
  EigenOptions o;
  o.k = 30;
  const auto emb = normalize_coordinates(eigen_top_k(g, o));
  const auto s = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(build_feature_table(g, emb, s, FeatureMode::spectral_vector));
}
BENCHMARK(BM_FeatureTable)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);
