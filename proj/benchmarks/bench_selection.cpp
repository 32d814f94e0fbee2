#include <benchmark/benchmark.h>

#include "agnostic/cover.hpp"
#include "agnostic/datasets.hpp"
#include "agnostic/relu.hpp"

namespace {

agnostic::SampleBatch planted(agnostic::LabelMode kind, int d, std::size_t n) {
  agnostic::RngStream rng(4);
  const auto model = agnostic::make_planted(kind, d, agnostic::NoiseSpec{}, rng);
  return agnostic::generate(model, n, rng).batch;
}

// Halfspace grid over a subspace of rank m.
void BM_HalfspaceSelection(benchmark::State& state) {
  const int m = static_cast<int>(state.range(0));
  const agnostic::SampleBatch b = planted(agnostic::LabelMode::halfspace, 8, 20'000);
  agnostic::Subspace sub = agnostic::full_space(8);
  sub.basis.conservativeResize(m, Eigen::NoChange);
  sub.eigenvalues.conservativeResize(m);
  const agnostic::HypothesisGrid grid = agnostic::build_grid(sub, 0.25);
  for (auto _ : state) benchmark::DoNotOptimize(agnostic::select_best(grid, b));
  state.counters["candidates"] = static_cast<double>(grid.size());
}

void BM_ReluSelection(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const agnostic::SampleBatch b = planted(agnostic::LabelMode::relu, d, 20'000);
  agnostic::ReluGrid grid;
  grid.directions = agnostic::unit_ball_cover(d, 0.25);
  grid.grids = agnostic::relu_grids(0.25);
  for (auto _ : state) benchmark::DoNotOptimize(agnostic::select_best_relu(grid, b));
  state.counters["candidates"] = static_cast<double>(grid.size());
}

BENCHMARK(BM_HalfspaceSelection)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ReluSelection)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

}  // namespace
