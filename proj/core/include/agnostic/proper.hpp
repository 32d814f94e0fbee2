#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "agnostic/cover.hpp"
#include "agnostic/influence.hpp"
#include "agnostic/regression.hpp"
#include "agnostic/sample.hpp"
#include "agnostic/timing.hpp"

namespace agnostic {

struct ProperLearnerConfig {
  double eps = 0.2;    // target excess error; also the cover radius
  double delta = 0.1;  // failure probability (holdout sizing)
  std::optional<int> degree;  // k; default min(ceil(C / eps^4), desk cap)
  std::optional<double> eta;  // default eps^2 / eta_divisor
  double degree_constant = 1.0;  // C in k = ceil(C / eps^4)
  double eta_divisor = 64.0;
  // 0 selects the default: 60% / 40% of a finite source; for a generator,
  // 100000 regression samples and ceil(holdout_constant * ln(|H|/delta) / eps^2)
  // holdout samples.
  std::size_t n_regression = 0;
  std::size_t n_holdout = 0;
  double holdout_constant = 4.0;
  int repeats = 1;
  double validation_fraction = 0.2;  // used only when repeats > 1
  double ridge_per_sample = 1e-8;    // ridge = ridge_per_sample * n
  std::size_t feature_cap = kDefaultFeatureCap;
  std::size_t enumeration_cap = kDefaultEnumerationCap;
  // Default degree keeps the feature count under n_regression / this.
  std::size_t samples_per_feature = 200;
  bool brute_force = false;

  void validate() const;
  bool operator==(const ProperLearnerConfig&) const = default;
};

struct ProperRunResult {
  HalfspaceHypothesis hypothesis;
  double holdout_error = 0.0;
  double best_constant_error = 0.0;

  int degree_used = 0;
  double degree_theoretical = 0.0;
  bool degree_capped = false;
  double eta_used = 0.0;
  std::size_t n_regression = 0;
  std::size_t n_holdout = 0;
  std::size_t n_features = 0;

  double regression_train_loss = 0.0;
  double regression_validation_loss = 0.0;
  std::vector<double> fold_validation_losses;
  double poly_norm_sq = 0.0;

  double influence_trace = 0.0;
  std::vector<double> spectrum;
  Subspace subspace;

  std::size_t cover_size = 0;
  std::size_t threshold_count = 0;
  std::size_t grid_size = 0;
  bool brute_force = false;
  bool brute_force_case = false;  // 1/eps^6 > d

  std::vector<std::string> flags;
  Timings timings;
};

// Default degree: min(ceil(C / eps^4), largest k whose feature count fits
// both feature_cap and n_regression / samples_per_feature).
int default_degree(const ProperLearnerConfig& config, int d, std::size_t n_regression,
                   double* theoretical = nullptr);

// Regression -> influence subspace -> eps-grid -> holdout argmin.
ProperRunResult learn_proper_halfspace(const ProperLearnerConfig& config, DataSource& source);

// Same grid machinery over V = R^d, skipping regression.
ProperRunResult brute_force_small_d(const ProperLearnerConfig& config, DataSource& source);

}  // namespace agnostic
