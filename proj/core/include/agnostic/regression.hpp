#pragma once

#include <cstddef>
#include <vector>

#include "agnostic/hermite.hpp"
#include "agnostic/sample.hpp"

namespace agnostic {

struct RegressionOptions {
  // Objective: sum_m (y_m - P(x_m))^2 + ridge * |c|^2.
  double ridge = 0.0;
  std::size_t feature_cap = kDefaultFeatureCap;
  // Above n * features entries the normal equations are accumulated block by
  // block instead of factoring the full feature matrix with QR. The Gram
  // route squares the condition number; Hermite features of Gaussian points
  // have Gram matrix close to n * I, so this is benign in practice.
  std::size_t dense_entry_limit = std::size_t{1} << 22;
};

struct RegressionResult {
  HermitePoly poly;
  double train_loss;  // mean squared residual on the fitted samples
  std::size_t n_used;
  bool used_gram;
};

// Least-squares fit of the labels onto the degree-<=k Hermite features.
// Throws UsageError when n < features with ridge == 0, DataError on
// non-finite data.
RegressionResult fit_l2(const SampleBatch& samples, int k, const RegressionOptions& options = {});

struct BoostedResult {
  RegressionResult best;
  double validation_loss;
  std::vector<double> fold_validation_losses;
  std::size_t chosen_fold;
  std::size_t fold_size;
  std::size_t validation_size;
};

// Fits `repeats` disjoint training folds and keeps the one with the smallest
// loss on a shared validation fold (the last floor(n * validation_fraction)
// rows). With validation_fraction == 0 the single fold's training loss is
// reported as its validation loss (only allowed for repeats == 1).
BoostedResult boosted_fit(const SampleBatch& samples, int k, int repeats, double validation_fraction,
                          const RegressionOptions& options = {});

Eigen::VectorXd predict(const HermitePoly& poly, const SampleBatch& batch);

// Mean squared residual; for the zero polynomial this is mean(y^2).
double loss(const HermitePoly& poly, const SampleBatch& batch);

}  // namespace agnostic
