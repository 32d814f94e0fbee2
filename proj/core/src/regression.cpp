#include "agnostic/regression.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include "agnostic/errors.hpp"
#include "agnostic/parallel.hpp"

namespace agnostic {
namespace {

// Sample blocks summed sequentially inside one chunk; chunks are the unit of
// parallel work and are reduced in index order.
constexpr std::size_t kBlocksPerChunk = 16;

void check_inputs(const SampleBatch& samples) {
  if (samples.x.rows() != samples.y.size()) {
    throw UsageError("batch has mismatched point and label counts");
  }
  if (!samples.y.allFinite()) throw DataError("regression labels contain non-finite values");
  if (!samples.x.allFinite()) throw DataError("regression points contain non-finite values");
}

Eigen::VectorXd solve_dense(const HermiteBasis& basis, const SampleBatch& samples, double ridge) {
  const std::size_t n = samples.size();
  const auto f = static_cast<Eigen::Index>(basis.size());
  const Eigen::Index extra = ridge > 0.0 ? f : 0;
  Eigen::MatrixXd a(static_cast<Eigen::Index>(n) + extra, f);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n) + extra);
  parallel_for(block_count(n), [&](std::size_t b) {
    const std::size_t first = b * kSampleBlock;
    const std::size_t count = std::min(kSampleBlock, n - first);
    a.middleRows(static_cast<Eigen::Index>(first), static_cast<Eigen::Index>(count)) =
        basis.feature_block(samples.x, first, count);
  });
  rhs.head(static_cast<Eigen::Index>(n)) = samples.y;
  if (extra > 0) {
    a.bottomRows(extra).setZero();
    a.bottomRows(extra).diagonal().setConstant(std::sqrt(ridge));
  }
  return a.colPivHouseholderQr().solve(rhs);
}

Eigen::VectorXd solve_gram(const HermiteBasis& basis, const SampleBatch& samples, double ridge) {
  const std::size_t n = samples.size();
  const auto f = static_cast<Eigen::Index>(basis.size());
  const std::size_t n_blocks = block_count(n);
  const std::size_t n_chunks = (n_blocks + kBlocksPerChunk - 1) / kBlocksPerChunk;

  std::vector<Eigen::MatrixXd> grams(n_chunks);
  std::vector<Eigen::VectorXd> rhss(n_chunks);
  parallel_for(n_chunks, [&](std::size_t c) {
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(f, f);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(f);
    const std::size_t last_block = std::min(n_blocks, (c + 1) * kBlocksPerChunk);
    for (std::size_t b = c * kBlocksPerChunk; b < last_block; ++b) {
      const std::size_t first = b * kSampleBlock;
      const std::size_t count = std::min(kSampleBlock, n - first);
      const PointMatrix block = basis.feature_block(samples.x, first, count);
      gram.selfadjointView<Eigen::Lower>().rankUpdate(block.transpose());
      rhs.noalias() += block.transpose() *
                       samples.y.segment(static_cast<Eigen::Index>(first), static_cast<Eigen::Index>(count));
    }
    grams[c] = std::move(gram);
    rhss[c] = std::move(rhs);
  });

  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(f, f);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(f);
  for (std::size_t c = 0; c < n_chunks; ++c) {
    gram += grams[c];
    rhs += rhss[c];
  }
  gram.diagonal().array() += ridge;
  const Eigen::MatrixXd full = gram.selfadjointView<Eigen::Lower>();
  Eigen::LDLT<Eigen::MatrixXd> ldlt(full);
  if (ldlt.info() != Eigen::Success) throw DataError("normal equations could not be factored");
  return ldlt.solve(rhs);
}

}  // namespace

RegressionResult fit_l2(const SampleBatch& samples, int k, const RegressionOptions& options) {
  check_inputs(samples);
  if (options.ridge < 0.0 || !std::isfinite(options.ridge)) {
    throw ConfigError("ridge must be finite and >= 0");
  }
  auto basis = std::make_shared<const HermiteBasis>(samples.dimension(), k, options.feature_cap);
  const std::size_t n = samples.size();
  const std::size_t f = basis->size();
  if (n < f && options.ridge == 0.0) {
    throw UsageError("underdetermined regression: " + std::to_string(n) + " samples for " +
                     std::to_string(f) + " Hermite features (degree " + std::to_string(k) + ")");
  }
  if (n == 0) throw UsageError("regression needs at least one sample");

  const bool use_gram = static_cast<double>(n) * static_cast<double>(f) >
                        static_cast<double>(options.dense_entry_limit);
  Eigen::VectorXd coeffs = use_gram ? solve_gram(*basis, samples, options.ridge)
                                    : solve_dense(*basis, samples, options.ridge);
  if (!coeffs.allFinite()) throw DataError("regression produced non-finite coefficients");

  RegressionResult result{HermitePoly(basis, std::move(coeffs)), 0.0, n, use_gram};
  result.train_loss = loss(result.poly, samples);
  return result;
}

BoostedResult boosted_fit(const SampleBatch& samples, int k, int repeats, double validation_fraction,
                          const RegressionOptions& options) {
  if (repeats < 1) throw ConfigError("repeats must be >= 1");
  if (!(validation_fraction >= 0.0 && validation_fraction < 1.0)) {
    throw ConfigError("validation_fraction must be in [0, 1)");
  }
  const std::size_t n = samples.size();
  const auto n_val = static_cast<std::size_t>(std::floor(static_cast<double>(n) * validation_fraction));
  if (n_val == 0 && repeats > 1) {
    throw UsageError("insufficient samples: boosting with " + std::to_string(repeats) +
                     " repeats needs a non-empty validation fold");
  }
  const std::size_t fold_size = (n - n_val) / static_cast<std::size_t>(repeats);
  const double features = feature_count(samples.dimension(), k);
  if (fold_size == 0 || (options.ridge == 0.0 && static_cast<double>(fold_size) < features)) {
    throw UsageError("insufficient samples: " + std::to_string(n) + " samples give folds of " +
                     std::to_string(fold_size) + " for " + std::to_string(static_cast<long>(features)) +
                     " features");
  }

  const SampleBatch validation = samples.slice(n - n_val, n_val);
  std::optional<RegressionResult> best;
  std::vector<double> fold_losses;
  double best_loss = 0.0;
  std::size_t chosen = 0;
  for (int r = 0; r < repeats; ++r) {
    RegressionResult fit = fit_l2(samples.slice(static_cast<std::size_t>(r) * fold_size, fold_size), k, options);
    const double val = n_val > 0 ? loss(fit.poly, validation) : fit.train_loss;
    fold_losses.push_back(val);
    if (!best || val < best_loss) {
      best_loss = val;
      chosen = static_cast<std::size_t>(r);
      best = std::move(fit);
    }
  }
  return BoostedResult{std::move(*best), best_loss, std::move(fold_losses), chosen, fold_size, n_val};
}

Eigen::VectorXd predict(const HermitePoly& poly, const SampleBatch& batch) {
  if (batch.dimension() != poly.dimension()) {
    throw UsageError("batch dimension " + std::to_string(batch.dimension()) +
                     " does not match polynomial dimension " + std::to_string(poly.dimension()));
  }
  const std::size_t n = batch.size();
  Eigen::VectorXd out(static_cast<Eigen::Index>(n));
  parallel_for(block_count(n), [&](std::size_t b) {
    const std::size_t first = b * kSampleBlock;
    const std::size_t count = std::min(kSampleBlock, n - first);
    out.segment(static_cast<Eigen::Index>(first), static_cast<Eigen::Index>(count)) =
        poly.basis().feature_block(batch.x, first, count) * poly.coeffs();
  });
  return out;
}

double loss(const HermitePoly& poly, const SampleBatch& batch) {
  if (batch.empty()) throw UsageError("loss of an empty batch");
  const Eigen::VectorXd residual = batch.y - predict(poly, batch);
  return residual.squaredNorm() / static_cast<double>(batch.size());
}

}  // namespace agnostic
