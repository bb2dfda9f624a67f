#include <benchmark/benchmark.h>

#include <random>
#include <string>
#include <vector>

#include "explicable/explicable.hpp"

using namespace explicable;

namespace {

std::vector<double> random_row(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

void BM_WeightedCce(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(1);
  auto w = random_row(n, rng);
  auto p = softmax(random_row(n, rng));
  for (auto _ : state) benchmark::DoNotOptimize(weighted_cce(w, p));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_WeightedCce)->RangeMultiplier(4)->Range(4, 1024);

void BM_WeightedCceGrad(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(2);
  auto w = random_row(n, rng);
  LogitVector z(random_row(n, rng));
  for (auto _ : state) benchmark::DoNotOptimize(weighted_cce_grad(w, z));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_WeightedCceGrad)->RangeMultiplier(4)->Range(4, 1024);

// Random tree on n nodes; all-pairs path similarity.
void BM_PathSimilarityAllPairs(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(3);
  std::string edges;
  for (std::size_t k = 1; k < n; ++k) edges += "n" + std::to_string(rng() % k) + "\tn" + std::to_string(k) + "\n";
  auto tax = Taxonomy::parse(edges);
  for (auto _ : state) {
    double s = 0.0;
    for (Taxonomy::NodeId a = 0; a < tax.size(); ++a) {
      for (Taxonomy::NodeId b = 0; b < tax.size(); ++b) s += tax.path_similarity(a, b);
    }
    benchmark::DoNotOptimize(s);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * n));
}
BENCHMARK(BM_PathSimilarityAllPairs)->Arg(16)->Arg(64)->Arg(256);

void BM_TrainEpoch(benchmark::State& state) {
  const auto hidden = static_cast<std::size_t>(state.range(0));
  auto data = generate_synthetic({1000, {{0, 0}, {1, 0}, {10, 10}}, 0.7, 7, {"dog", "cat", "car"}});
  auto w = from_taxonomy(Taxonomy::parse("root\tanimal\nroot\tvehicle\nanimal\tdog\nanimal\tcat\nvehicle\tcar\n"),
                         LabelMap::parse("index,name,node\n0,dog,dog\n1,cat,cat\n2,car,car\n"));
  TrainConfig cfg;
  cfg.epochs = 1;
  cfg.hidden_units = hidden;
  for (auto _ : state) benchmark::DoNotOptimize(train(data, w, cfg));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(data.size()));
}
BENCHMARK(BM_TrainEpoch)->Arg(0)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_Lemma2Suite(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(run_lemma2_suite(1000, 1));
}
BENCHMARK(BM_Lemma2Suite)->Unit(benchmark::kMillisecond);

void BM_SimulationRegime(benchmark::State& state) {
  SimConfig cfg;
  for (auto _ : state) {
    auto curves = sweep(cfg);
    benchmark::DoNotOptimize(regime_report(curves, cfg));
  }
}
BENCHMARK(BM_SimulationRegime);

}  // namespace

BENCHMARK_MAIN();
