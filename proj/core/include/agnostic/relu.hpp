#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "agnostic/cover.hpp"
#include "agnostic/influence.hpp"
#include "agnostic/regression.hpp"
#include "agnostic/sample.hpp"
#include "agnostic/timing.hpp"

namespace agnostic {

inline double relu(double z) noexcept { return z > 0.0 ? z : 0.0; }

// a * relu(v . x + t). The bias is in pre-scaled units: a relu(v.x + t)
// equals relu(a v.x + a t), so t is the offset before the scale is applied.
struct ReluHypothesis {
  Eigen::VectorXd v;
  double a = 1.0;
  double t = 0.0;

  double predict(std::span<const double> x) const noexcept {
    return a * relu(dot({v.data(), static_cast<std::size_t>(v.size())}, x) + t);
  }
};

// Mean of (y - h(x))^2.
double squared_loss(const ReluHypothesis& h, const SampleBatch& batch);

struct ReluGrids {
  std::vector<double> scales;  // eps/A, 2 eps/A, ..., 1
  std::vector<double> biases;  // j * step over [-B sqrt(ln(1/eps)), B'], contains 0
  double bias_step = 0.0;      // eps^2 / sqrt(ln(1/eps))
};

// Throws ConfigError unless 0 < eps < 1, ResourceError when
// |scales| * |biases| exceeds `cap`.
ReluGrids relu_grids(double eps, double scale_constant = 4.0, double bias_negative = 1.0,
                     double bias_positive = 2.0, std::size_t cap = kDefaultEnumerationCap);

// E[relu(x) H_n(x)] for x ~ N(0, 1). Odd degrees integrate x H_n / 2 with
// Gauss-Hermite; even degrees substitute s = x^2 / 2 and use Gauss-Laguerre,
// which is exact because H_n(sqrt(2 s)) is then a polynomial in s.
double relu_hermite_1d(int n);

// sum_{n > k} c_n^2 = 1/2 - sum_{n <= k} c_n^2.
double relu_hermite_tail(int k);

struct ReluLearnerConfig {
  double eps = 0.25;
  double delta = 0.1;
  std::optional<int> degree;  // default min(ceil(C / eps^(4/3)), desk cap)
  std::optional<double> eta;  // default eps^2 / eta_divisor
  double degree_constant = 1.0;
  double eta_divisor = 64.0;
  // 0 selects the default split: 60% / 40% of a finite source; for a
  // generator, 100000 regression samples and
  // ceil(holdout_constant * ln(|H|/delta) / eps^2) holdout samples.
  std::size_t n_regression = 0;
  std::size_t n_holdout = 0;
  double holdout_constant = 4.0;
  double ridge_per_sample = 1e-8;
  double scale_constant = 4.0;  // A
  double bias_negative = 1.0;   // B
  double bias_positive = 2.0;   // B'
  std::size_t feature_cap = kDefaultFeatureCap;
  std::size_t enumeration_cap = kDefaultEnumerationCap;
  std::size_t samples_per_feature = 200;

  void validate() const;
  bool operator==(const ReluLearnerConfig&) const = default;
};

struct ReluRunResult {
  ReluHypothesis hypothesis;
  double holdout_loss = 0.0;
  double train_loss = 0.0;  // selected candidate on the regression samples
  int degree_used = 0;
  double degree_theoretical = 0.0;
  bool degree_capped = false;
  double eta_used = 0.0;
  std::size_t n_regression = 0;
  std::size_t n_holdout = 0;
  std::size_t n_features = 0;
  double regression_train_loss = 0.0;
  double poly_norm_sq = 0.0;
  double influence_trace = 0.0;
  std::vector<double> spectrum;
  Subspace subspace;
  std::size_t cover_size = 0;
  std::size_t scale_count = 0;
  std::size_t bias_count = 0;
  double bias_step = 0.0;
  std::size_t grid_size = 0;
  std::size_t selected_index = 0;
  std::vector<std::string> flags;
  Timings timings;
};

// Candidate order: direction-major, then scale, then bias.
struct ReluGrid {
  std::vector<Eigen::VectorXd> directions;
  ReluGrids grids;

  std::size_t size() const noexcept { return directions.size() * grids.scales.size() * grids.biases.size(); }
  ReluHypothesis candidate(std::size_t index) const;
};

struct ReluSelection {
  ReluHypothesis hypothesis;
  double loss = 0.0;
  std::size_t index = 0;
};

// Holdout losses of every candidate, in grid order.
std::vector<double> candidate_losses(const ReluGrid& grid, const SampleBatch& batch);

// Empirical squared-loss minimizer; ties go to the earlier candidate.
ReluSelection select_best_relu(const ReluGrid& grid, const SampleBatch& holdout);

ReluRunResult learn_relu(const ReluLearnerConfig& config, DataSource& source);

}  // namespace agnostic
