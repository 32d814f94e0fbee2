#include <benchmark/benchmark.h>

#include "agnostic/datasets.hpp"
#include "agnostic/influence.hpp"
#include "agnostic/regression.hpp"

namespace {

void BM_FitL2(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const auto n = static_cast<std::size_t>(state.range(1));
  agnostic::RngStream rng(2);
  const auto model = agnostic::make_planted(agnostic::LabelMode::halfspace, d, agnostic::NoiseSpec{}, rng);
  const agnostic::SampleBatch b = agnostic::generate(model, n, rng).batch;
  for (auto _ : state) benchmark::DoNotOptimize(agnostic::fit_l2(b, 3));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}

void BM_InfluenceMatrix(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  agnostic::RngStream rng(3);
  const auto model = agnostic::make_planted(agnostic::LabelMode::halfspace, d, agnostic::NoiseSpec{}, rng);
  const agnostic::SampleBatch b = agnostic::generate(model, 20'000, rng).batch;
  const agnostic::RegressionResult fit = agnostic::fit_l2(b, 4);
  for (auto _ : state) benchmark::DoNotOptimize(agnostic::influence_matrix(fit.poly));
}

BENCHMARK(BM_FitL2)->Args({4, 20'000})->Args({8, 20'000})->Args({8, 100'000})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_InfluenceMatrix)->Arg(4)->Arg(8)->Unit(benchmark::kMicrosecond);

}  // namespace
