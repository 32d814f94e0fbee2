#include <benchmark/benchmark.h>

#include "agnostic/gaussian.hpp"
#include "agnostic/hermite.hpp"

namespace {

void BM_FeatureBlock(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const int k = static_cast<int>(state.range(1));
  agnostic::RngStream rng(1);
  const agnostic::PointMatrix x = agnostic::sample_gaussian(d, 4096, rng);
  const agnostic::HermiteBasis basis(d, k);
  for (auto _ : state) benchmark::DoNotOptimize(basis.feature_block(x, 0, 4096));
  state.SetItemsProcessed(state.iterations() * 4096);
  state.counters["features"] = static_cast<double>(basis.size());
}

BENCHMARK(BM_FeatureBlock)->Args({4, 3})->Args({8, 3})->Args({8, 4})->Args({16, 3});

}  // namespace
