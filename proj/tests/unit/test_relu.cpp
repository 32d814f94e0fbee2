#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "agnostic/datasets.hpp"
#include "agnostic/errors.hpp"
#include "agnostic/parallel.hpp"
#include "agnostic/relu.hpp"
#include "oracles.hpp"

using namespace agnostic;

namespace {

struct Planted {
  PlantedModel model;
  SampleBatch train;
  SampleBatch test;
};

Planted planted(int d, std::size_t n, const char* noise, double scale, std::uint64_t seed) {
  RngStream root(seed);
  RngStream model_rng = root.substream(1);
  RngStream train_rng = root.substream(2);
  RngStream test_rng = root.substream(3);
  Planted p;
  p.model = make_planted(LabelMode::relu, d, NoiseSpec::parse(noise), model_rng, 0.0, scale);
  p.train = generate(p.model, n, train_rng).batch;
  p.test = generate(p.model, 50'000, test_rng).batch;
  return p;
}

ReluRunResult run(const ReluLearnerConfig& config, const SampleBatch& train) {
  BatchSource source(train);
  return learn_relu(config, source);
}

}  // namespace

TEST_CASE("one-dimensional relu hermite coefficients") {
  CHECK(std::abs(relu_hermite_1d(0) - 1 / std::sqrt(2 * std::numbers::pi)) <= 1e-12);
  CHECK(std::abs(relu_hermite_1d(1) - 0.5) <= 1e-12);
  CHECK(std::abs(relu_hermite_1d(3)) <= 1e-12);
  for (int n = 0; n <= 40; ++n) {
    INFO("n=" << n);
    CHECK(std::abs(relu_hermite_1d(n) - oracle::relu_coefficient(n)) <= 1e-12);
  }
  // E[relu(x)^2] = 1/2 is the full Parseval sum.
  double sum = 0.0;
  for (int n = 0; n <= 60; ++n) sum += relu_hermite_1d(n) * relu_hermite_1d(n);
  CHECK(sum <= 0.5);
  CHECK(sum >= 0.5 - 1e-4);
}

TEST_CASE("relu hermite tail decays like k to the minus three halves") {
  // Reference tails from 40-digit closed-form sums.
  CHECK(relu_hermite_tail(4) == doctest::Approx(0.00463612939999).epsilon(1e-9));
  CHECK(relu_hermite_tail(8) == doctest::Approx(0.00175855118784).epsilon(1e-9));
  CHECK(relu_hermite_tail(16) == doctest::Approx(0.00064210680496).epsilon(1e-8));
  CHECK(relu_hermite_tail(32) == doctest::Approx(0.000230485630171).epsilon(1e-7));
  const std::vector<int> ks{4, 8, 16, 32};
  double kappa = 0.0;
  double low = 1e300;
  for (int k : ks) {
    kappa = std::max(kappa, relu_hermite_tail(k) * std::pow(k, 1.5));
    low = std::min(low, relu_hermite_tail(k) * std::pow(k, 1.5));
  }
  for (std::size_t i = 0; i < ks.size(); ++i) {
    CHECK(relu_hermite_tail(ks[i]) <= kappa * std::pow(ks[i], -1.5));
    if (i > 0) CHECK(relu_hermite_tail(ks[i]) < relu_hermite_tail(ks[i - 1]));
  }
  // A single constant fits the whole range: the rate is k^{-3/2}, not slower.
  CHECK(kappa / low <= 1.2);
}

TEST_CASE("relu grids") {
  const ReluGrids g = relu_grids(0.25);
  REQUIRE(g.scales.size() == 16);
  CHECK(g.scales.front() == doctest::Approx(0.0625));
  CHECK(g.scales.back() == 1.0);
  for (std::size_t i = 1; i < g.scales.size(); ++i) CHECK(g.scales[i] - g.scales[i - 1] == doctest::Approx(0.0625));
  CHECK(g.bias_step == doctest::Approx(0.0625 / std::sqrt(std::log(4.0))));
  CHECK(g.bias_step == doctest::Approx(0.0531).epsilon(1e-3));
  CHECK(std::count(g.biases.begin(), g.biases.end(), 0.0) == 1);
  for (std::size_t i = 1; i < g.biases.size(); ++i) {
    CHECK(g.biases[i] - g.biases[i - 1] == doctest::Approx(g.bias_step));
  }
  CHECK(g.biases.front() >= -std::sqrt(std::log(4.0)) - 1e-12);
  CHECK(g.biases.front() - g.bias_step < -std::sqrt(std::log(4.0)));
  CHECK(g.biases.back() <= 2.0 + 1e-12);
  CHECK(g.biases.back() + g.bias_step > 2.0);
  CHECK_THROWS_AS(relu_grids(0.0), ConfigError);
  CHECK_THROWS_AS(relu_grids(1.0), ConfigError);
  CHECK_THROWS_AS(relu_grids(0.25, 4.0, 1.0, 2.0, 100), ResourceError);
}

TEST_CASE("candidate losses match direct evaluation") {
  const Planted p = planted(3, 4000, "additive_uniform:0.2", 0.7, 4);
  RngStream rng(4);
  ReluGrid grid;
  grid.grids = relu_grids(0.5);
  for (int i = 0; i < 5; ++i) grid.directions.push_back(oracle::random_unit(3, rng));
  grid.directions.push_back(p.model.w_star);
  const std::vector<double> losses = candidate_losses(grid, p.train);
  REQUIRE(losses.size() == grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    REQUIRE(std::abs(losses[i] - squared_loss(grid.candidate(i), p.train)) <= 1e-10);
  }
  const ReluSelection s = select_best_relu(grid, p.train);
  for (double l : losses) CHECK(s.loss <= l);
  CHECK(s.index == static_cast<std::size_t>(std::min_element(losses.begin(), losses.end()) - losses.begin()));
  CHECK(std::abs(s.hypothesis.v.norm() - 1.0) <= 1e-10);
  CHECK(s.hypothesis.a > 0.0);
  CHECK(s.hypothesis.a <= 1.0);
}

TEST_CASE("zero labels select a near-zero predictor") {
  RngStream rng(5);
  SampleBatch b;
  b.mode = LabelMode::relu;
  b.x = sample_gaussian(2, 5000, rng);
  b.y = Eigen::VectorXd::Zero(5000);
  ReluGrid grid;
  grid.grids = relu_grids(0.3);
  grid.directions = {Eigen::Vector2d(1, 0), Eigen::Vector2d(0, 1)};
  const ReluSelection s = select_best_relu(grid, b);
  for (double l : candidate_losses(grid, b)) CHECK(s.loss <= l);
  const double a_min = grid.grids.scales.front();
  CHECK(s.loss <= a_min * a_min / 2);
  CHECK(s.hypothesis.a == a_min);
}

TEST_CASE("relu differences are bounded by parameter distances") {
  RngStream rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    const int d = 4;
    const Eigen::VectorXd u = oracle::random_unit(d, rng);
    const Eigen::VectorXd v = oracle::random_unit(d, rng);
    const double t = rng.normal();
    const double t2 = t + 0.3 * rng.normal();
    const PointMatrix x = sample_gaussian(d, 20'000, rng);
    double dir = 0.0;
    double bias = 0.0;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      const double zu = u.dot(x.row(i).transpose());
      const double zv = v.dot(x.row(i).transpose());
      dir += std::pow(relu(zv + t) - relu(zu + t), 2);
      bias += std::pow(relu(zu + t) - relu(zu + t2), 2);
    }
    dir /= static_cast<double>(x.rows());
    bias /= static_cast<double>(x.rows());
    // relu is 1-Lipschitz, so kappa = 1 for both; allow Monte Carlo slack.
    CHECK(dir <= 1.1 * (v - u).squaredNorm());
    CHECK(bias <= (t - t2) * (t - t2) + 1e-12);
  }
}

TEST_CASE("clean planted relu") {
  const Planted p = planted(6, 200'000, "clean", 0.5, 7);
  ReluLearnerConfig config;
  config.degree = 4;
  const ReluRunResult r = run(config, p.train);
  CHECK(squared_loss(r.hypothesis, p.test) <= 0.01);
  CHECK(r.n_regression == 120'000);
  CHECK(r.n_holdout == 80'000);
  CHECK(r.degree_used == 4);
  CHECK(r.degree_theoretical == doctest::Approx(std::ceil(std::pow(0.25, -4.0 / 3.0))));
  CHECK(r.grid_size == r.cover_size * r.scale_count * r.bias_count);
  REQUIRE(r.subspace.rank() >= 1);
  CHECK(std::abs(r.subspace.basis.row(0).dot(p.model.w_star)) >= 0.9);
  CHECK(r.hypothesis.v.dot(p.model.w_star) >= 0.9);
}

TEST_CASE("additive noise floor") {
  const Planted p = planted(4, 100'000, "additive_uniform:0.1", 0.5, 8);
  ReluLearnerConfig config;
  config.degree = 3;
  const ReluRunResult r = run(config, p.train);
  CHECK(squared_loss(r.hypothesis, p.test) <= 0.01 / 3 + 0.01);
}

TEST_CASE("holdout loss concentrates") {
  int good = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Planted p = planted(3, 120'000, "additive_uniform:0.3", 0.5, 100 + seed);
    ReluLearnerConfig config;
    config.degree = 2;
    config.eps = 0.3;
    config.n_regression = 20'000;
    config.n_holdout = 100'000;
    const ReluRunResult r = run(config, p.train);
    good += std::abs(r.train_loss - r.holdout_loss) <= 0.05;
  }
  CHECK(good >= 19);
}

TEST_CASE("relu runs are deterministic across thread counts") {
  const Planted p = planted(4, 40'000, "additive_uniform:0.1", 0.5, 9);
  ReluLearnerConfig config;
  config.degree = 3;
  const unsigned before = worker_threads();
  set_worker_threads(1);
  const ReluRunResult a = run(config, p.train);
  set_worker_threads(3);
  const ReluRunResult b = run(config, p.train);
  set_worker_threads(before);
  CHECK((a.hypothesis.v == b.hypothesis.v));
  CHECK(a.hypothesis.a == b.hypothesis.a);
  CHECK(a.hypothesis.t == b.hypothesis.t);
  CHECK(a.holdout_loss == b.holdout_loss);
  CHECK(a.selected_index == b.selected_index);
}

TEST_CASE("relu configuration errors") {
  ReluLearnerConfig config;
  config.eps = 0.0;
  CHECK_THROWS_AS(config.validate(), ConfigError);
  config = {};
  config.scale_constant = -1.0;
  CHECK_THROWS_AS(config.validate(), ConfigError);
  SampleBatch b;
  b.x = PointMatrix::Zero(10, 2);
  b.y = Eigen::VectorXd::Ones(10);
  BatchSource source(b);
  CHECK_THROWS_AS(learn_relu(ReluLearnerConfig{}, source), UsageError);
}
