#include <benchmark/benchmark.h>

#include <Eigen/Dense>

#include "agnostic/influence.hpp"

namespace {

void BM_Jacobi(benchmark::State& state) {
  const auto d = static_cast<Eigen::Index>(state.range(0));
  const Eigen::MatrixXd a = Eigen::MatrixXd::Random(d, d);
  const Eigen::MatrixXd m = a * a.transpose();
  for (auto _ : state) benchmark::DoNotOptimize(agnostic::eig_sym(m));
}

BENCHMARK(BM_Jacobi)->Arg(4)->Arg(8)->Arg(16)->Arg(32)->Unit(benchmark::kMicrosecond);

}  // namespace
