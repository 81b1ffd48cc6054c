#include <benchmark/benchmark.h>

#include <random>

#include "attnfuse/data_io.hpp"
#include "attnfuse/metrics.hpp"
#include "attnfuse/owa.hpp"
#include "attnfuse/screening.hpp"

using namespace attnfuse;

namespace {

std::vector<double> uniform_values(std::size_t n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

void BM_DowaAggregate(benchmark::State& state) {
  const auto args = uniform_values(static_cast<std::size_t>(state.range(0)), 1);
  for (auto _ : state) benchmark::DoNotOptimize(owa::dowa_aggregate(args));
}
BENCHMARK(BM_DowaAggregate)->Arg(3)->Arg(16)->Arg(256);

void BM_IowaTrain(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto values = uniform_values(n * 3, 2);
  std::vector<owa::IowaTrainingSample> samples(n);
  for (std::size_t i = 0; i < n; ++i) {
    samples[i].arguments = {values[3 * i], values[3 * i + 1], values[3 * i + 2]};
    samples[i].target = i % 2 == 0 ? 1.0 : 0.0;
  }
  owa::IowaTrainOptions options;
  options.max_epochs = 20;
  options.tolerance = 0.0;
  for (auto _ : state) benchmark::DoNotOptimize(owa::iowa_train(samples, options));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n) * options.max_epochs);
}
BENCHMARK(BM_IowaTrain)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_ScreeningForest(benchmark::State& state) {
  SynthConfig synth;
  synth.n_samples = static_cast<std::size_t>(state.range(0));
  synth.seed = 3;
  const auto data = make_synthetic(synth);
  ForestConfig config;
  config.n_trees = 20;
  for (auto _ : state) benchmark::DoNotOptimize(fit_bootstrap_forest(data, config));
}
BENCHMARK(BM_ScreeningForest)->Arg(1000)->Arg(5000)->Unit(benchmark::kMillisecond);

void BM_RocCurve(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto scores = uniform_values(n, 4);
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = scores[i] + 0.3 * ((i * 7919) % 3) > 0.6 ? 1 : 0;
  for (auto _ : state) benchmark::DoNotOptimize(roc_curve(scores, labels));
}
BENCHMARK(BM_RocCurve)->Arg(1000)->Arg(100000);

}  // namespace

BENCHMARK_MAIN();
