#include "agnostic/relu.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>

#include "agnostic/errors.hpp"
#include "agnostic/hermite.hpp"
#include "agnostic/parallel.hpp"

namespace agnostic {
namespace {

constexpr std::size_t kGeneratorRegressionDefault = 100'000;

bool finite_source(const DataSource& source) {
  return source.remaining() != std::numeric_limits<std::size_t>::max();
}

// Suffix sums over margins sorted ascending; entry i covers z[i..n).
struct SortedSums {
  std::vector<double> z;
  std::vector<double> s1, sz, szz, sy, szy;
  double syy = 0.0;

  SortedSums(const Eigen::VectorXd& v, const SampleBatch& batch) {
    const Eigen::VectorXd raw = margins(v, batch.x);
    const std::size_t n = batch.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return raw[static_cast<Eigen::Index>(a)] < raw[static_cast<Eigen::Index>(b)];
    });
    z.resize(n);
    s1.assign(n + 1, 0.0);
    sz.assign(n + 1, 0.0);
    szz.assign(n + 1, 0.0);
    sy.assign(n + 1, 0.0);
    szy.assign(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) z[i] = raw[static_cast<Eigen::Index>(order[i])];
    for (std::size_t r = n; r-- > 0;) {
      const double zi = z[r];
      const double yi = batch.y[static_cast<Eigen::Index>(order[r])];
      s1[r] = s1[r + 1] + 1.0;
      sz[r] = sz[r + 1] + zi;
      szz[r] = szz[r + 1] + zi * zi;
      sy[r] = sy[r + 1] + yi;
      szy[r] = szy[r + 1] + zi * yi;
    }
    for (std::size_t i = 0; i < n; ++i) {
      const double yi = batch.y[static_cast<Eigen::Index>(i)];
      syy += yi * yi;
    }
  }

  // Sum of (y - a relu(z + t))^2 over the batch.
  void losses(double t, const std::vector<double>& scales, double* out) const {
    const auto first = static_cast<std::size_t>(std::upper_bound(z.begin(), z.end(), -t) - z.begin());
    const double act = szz[first] + 2.0 * t * sz[first] + t * t * s1[first];
    const double cross = szy[first] + t * sy[first];
    for (std::size_t j = 0; j < scales.size(); ++j) {
      const double a = scales[j];
      out[j] = std::max(0.0, syy - 2.0 * a * cross + a * a * act);
    }
  }
};

}  // namespace

double squared_loss(const ReluHypothesis& h, const SampleBatch& batch) {
  if (batch.empty()) throw UsageError("squared loss of an empty batch");
  if (h.v.size() != batch.dimension()) throw UsageError("hypothesis dimension does not match batch dimension");
  double acc = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const double r = batch.y[static_cast<Eigen::Index>(i)] - h.predict(batch.point(i));
    acc += r * r;
  }
  return acc / static_cast<double>(batch.size());
}

ReluGrids relu_grids(double eps, double scale_constant, double bias_negative, double bias_positive,
                     std::size_t cap) {
  if (!(eps > 0.0 && eps < 1.0)) throw ConfigError("relu grid needs 0 < eps < 1, got " + std::to_string(eps));
  if (!(scale_constant > 0.0)) throw ConfigError("scale constant A must be > 0");
  if (!(bias_negative >= 0.0 && bias_positive >= 0.0)) throw ConfigError("bias range constants must be >= 0");
  const double scale_step = eps / scale_constant;
  const double log_term = std::sqrt(std::log(1.0 / eps));
  const double bias_step = eps * eps / log_term;
  const double n_scales = std::ceil(1.0 / scale_step - 1e-9);
  const double n_neg = std::floor(bias_negative * log_term / bias_step + 1e-9);
  const double n_pos = std::floor(bias_positive / bias_step + 1e-9);
  if (n_scales * (n_neg + n_pos + 1.0) > static_cast<double>(cap)) {
    throw ResourceError("relu scale x bias grid has " + std::to_string(n_scales * (n_neg + n_pos + 1.0)) +
                        " points, above the enumeration cap " + std::to_string(cap));
  }
  ReluGrids grids;
  grids.bias_step = bias_step;
  for (long j = 1; j <= static_cast<long>(n_scales); ++j) {
    grids.scales.push_back(std::min(1.0, static_cast<double>(j) * scale_step));
  }
  for (long j = -static_cast<long>(n_neg); j <= static_cast<long>(n_pos); ++j) {
    grids.biases.push_back(static_cast<double>(j) * bias_step);
  }
  return grids;
}

double relu_hermite_1d(int n) {
  if (n < 0) throw UsageError("Hermite degree must be >= 0");
  static const QuadratureRule hermite = gauss_hermite_rule(kMaxQuadratureNodes);
  static const QuadratureRule laguerre = gauss_laguerre_rule(kMaxQuadratureNodes);
  if (n % 2 == 1) {
    // relu(x) = (x + |x|) / 2 and |x| H_n(x) is odd.
    return 0.5 * hermite.integrate([n](double x) { return x * eval_hermite_1d(n, x); });
  }
  const double integral = laguerre.integrate([n](double s) { return eval_hermite_1d(n, std::sqrt(2.0 * s)); });
  return integral / std::sqrt(2.0 * std::numbers::pi);
}

double relu_hermite_tail(int k) {
  if (k < 0) throw UsageError("tail degree must be >= 0");
  double head = 0.0;
  for (int n = 0; n <= k; ++n) {
    const double c = relu_hermite_1d(n);
    head += c * c;
  }
  return std::max(0.0, 0.5 - head);
}

void ReluLearnerConfig::validate() const {
  if (!(eps > 0.0 && eps < 1.0)) throw ConfigError("eps must be in (0, 1), got " + std::to_string(eps));
  if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("delta must be in (0, 1), got " + std::to_string(delta));
  if (degree && *degree < 0) throw ConfigError("degree must be >= 0");
  if (eta && !(*eta > 0.0)) throw ConfigError("eta must be > 0");
  if (!(degree_constant > 0.0)) throw ConfigError("degree_constant must be > 0");
  if (!(eta_divisor > 0.0)) throw ConfigError("eta_divisor must be > 0");
  if (!(holdout_constant > 0.0)) throw ConfigError("holdout_constant must be > 0");
  if (!(ridge_per_sample >= 0.0)) throw ConfigError("ridge_per_sample must be >= 0");
  if (!(scale_constant > 0.0)) throw ConfigError("scale_constant must be > 0");
  if (!(bias_negative >= 0.0)) throw ConfigError("bias_negative must be >= 0");
  if (!(bias_positive >= 0.0)) throw ConfigError("bias_positive must be >= 0");
  if (samples_per_feature == 0) throw ConfigError("samples_per_feature must be >= 1");
}

ReluHypothesis ReluGrid::candidate(std::size_t index) const {
  if (index >= size()) throw UsageError("relu grid candidate index out of range");
  const std::size_t n_bias = grids.biases.size();
  const std::size_t n_scale = grids.scales.size();
  const std::size_t dir = index / (n_scale * n_bias);
  const std::size_t rest = index % (n_scale * n_bias);
  return ReluHypothesis{directions[dir], grids.scales[rest / n_bias], grids.biases[rest % n_bias]};
}

std::vector<double> candidate_losses(const ReluGrid& grid, const SampleBatch& batch) {
  if (batch.empty()) throw UsageError("candidate selection needs a non-empty holdout");
  const std::size_t n_bias = grid.grids.biases.size();
  const std::size_t n_scale = grid.grids.scales.size();
  const double n = static_cast<double>(batch.size());
  std::vector<double> out(grid.size(), 0.0);
  parallel_for(grid.directions.size(), [&](std::size_t dir) {
    if (grid.directions[dir].size() != batch.dimension()) throw UsageError("holdout dimension does not match the grid");
    const SortedSums sums(grid.directions[dir], batch);
    std::vector<double> by_scale(n_scale);
    for (std::size_t b = 0; b < n_bias; ++b) {
      sums.losses(grid.grids.biases[b], grid.grids.scales, by_scale.data());
      for (std::size_t s = 0; s < n_scale; ++s) out[(dir * n_scale + s) * n_bias + b] = by_scale[s] / n;
    }
  });
  return out;
}

ReluSelection select_best_relu(const ReluGrid& grid, const SampleBatch& holdout) {
  const std::vector<double> losses = candidate_losses(grid, holdout);
  if (losses.empty()) throw std::logic_error("empty relu grid");
  const auto best = static_cast<std::size_t>(std::min_element(losses.begin(), losses.end()) - losses.begin());
  for (double l : losses) {
    if (l < losses[best]) throw std::logic_error("relu selection is not the grid minimizer");
  }
  return ReluSelection{grid.candidate(best), losses[best], best};
}

ReluRunResult learn_relu(const ReluLearnerConfig& config, DataSource& source) {
  config.validate();
  if (source.mode() != LabelMode::relu) throw UsageError("learn_relu needs real labels in [-1, 1]");
  const int d = source.dimension();
  ReluRunResult out;
  Stopwatch clock;

  const bool finite = finite_source(source);
  const std::size_t total = finite ? source.remaining() : 0;
  std::size_t n_reg = config.n_regression;
  if (n_reg == 0) n_reg = finite ? static_cast<std::size_t>(std::floor(0.6 * static_cast<double>(total)))
                                 : kGeneratorRegressionDefault;
  out.n_regression = n_reg;

  out.degree_theoretical = std::ceil(config.degree_constant / std::pow(config.eps, 4.0 / 3.0));
  if (config.degree) {
    out.degree_used = *config.degree;
  } else {
    const double budget = std::min(static_cast<double>(config.feature_cap),
                                   std::max(1.0, static_cast<double>(n_reg) /
                                                     static_cast<double>(config.samples_per_feature)));
    int k = 0;
    while (static_cast<double>(k + 1) <= out.degree_theoretical && feature_count(d, k + 1) <= budget) ++k;
    out.degree_used = k;
  }
  out.degree_capped = static_cast<double>(out.degree_used) < out.degree_theoretical;
  if (out.degree_capped) out.flags.push_back("degree_capped");
  out.eta_used = config.eta ? *config.eta : config.eps * config.eps / config.eta_divisor;

  const SampleBatch regression = source.draw(n_reg);
  RegressionOptions options;
  options.ridge = config.ridge_per_sample * static_cast<double>(n_reg);
  options.feature_cap = config.feature_cap;
  const RegressionResult fit = fit_l2(regression, out.degree_used, options);
  out.n_features = fit.poly.basis().size();
  out.regression_train_loss = fit.train_loss;
  out.poly_norm_sq = parseval_norm_sq(fit.poly);
  out.timings.add("regression", clock.lap());

  const InfluenceMatrix influence = influence_matrix(fit.poly);
  out.influence_trace = influence.trace();
  const SymmetricEigen eig = eig_sym(influence.m);
  out.spectrum.assign(eig.values.data(), eig.values.data() + eig.values.size());
  out.subspace = select_subspace(influence, out.eta_used);
  if (out.subspace.rank() == 0) {
    // Degenerate fit: fall back to the top eigenvector so the grid is not empty.
    out.flags.push_back("empty_subspace");
    out.subspace.basis = eig.vectors.col(0).transpose();
    out.subspace.eigenvalues = eig.values.head(1);
  }
  out.timings.add("influence", clock.lap());

  ReluGrid grid;
  grid.grids = relu_grids(config.eps, config.scale_constant, config.bias_negative, config.bias_positive,
                          config.enumeration_cap);
  for (const Eigen::VectorXd& c : unit_ball_cover(out.subspace.rank(), config.eps, config.enumeration_cap)) {
    Eigen::VectorXd v = lift(c, out.subspace);
    grid.directions.push_back(v / v.norm());
  }
  out.cover_size = grid.directions.size();
  out.scale_count = grid.grids.scales.size();
  out.bias_count = grid.grids.biases.size();
  out.bias_step = grid.grids.bias_step;
  out.grid_size = grid.size();
  if (out.grid_size > config.enumeration_cap) {
    throw ResourceError("relu hypothesis grid has " + std::to_string(out.grid_size) +
                        " candidates, above the enumeration cap " + std::to_string(config.enumeration_cap));
  }
  out.timings.add("grid", clock.lap());

  std::size_t n_holdout = config.n_holdout;
  if (n_holdout == 0) {
    n_holdout = finite ? total - n_reg
                       : static_cast<std::size_t>(std::ceil(config.holdout_constant *
                                                            std::log(static_cast<double>(out.grid_size) / config.delta) /
                                                            (config.eps * config.eps)));
  }
  if (n_holdout == 0) throw UsageError("no samples left for the selection holdout");
  const SampleBatch holdout = source.draw(n_holdout);
  out.n_holdout = n_holdout;
  const ReluSelection selection = select_best_relu(grid, holdout);
  out.hypothesis = selection.hypothesis;
  out.selected_index = selection.index;
  out.holdout_loss = squared_loss(selection.hypothesis, holdout);
  out.train_loss = squared_loss(selection.hypothesis, regression);
  out.timings.add("selection", clock.lap());
  return out;
}

}  // namespace agnostic
