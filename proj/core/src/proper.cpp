#include "agnostic/proper.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "agnostic/errors.hpp"

namespace agnostic {
namespace {

constexpr std::size_t kGeneratorRegressionDefault = 100'000;

std::size_t holdout_size_rule(const ProperLearnerConfig& config, std::size_t grid_size) {
  const double n = config.holdout_constant * std::log(static_cast<double>(grid_size) / config.delta) /
                   (config.eps * config.eps);
  return static_cast<std::size_t>(std::ceil(std::max(n, 1.0)));
}

bool finite_source(const DataSource& source) {
  return source.remaining() != std::numeric_limits<std::size_t>::max();
}

void finish_selection(const ProperLearnerConfig& config, const Subspace& subspace, DataSource& source,
                      std::size_t n_holdout_default, ProperRunResult& out, Stopwatch& clock) {
  const HypothesisGrid grid = build_grid(subspace, config.eps, config.enumeration_cap);
  out.cover_size = grid.directions.size();
  out.threshold_count = grid.thresholds.size();
  out.grid_size = grid.size();
  out.timings.add("grid", clock.lap());

  std::size_t n_holdout = config.n_holdout;
  if (n_holdout == 0) n_holdout = finite_source(source) ? n_holdout_default : holdout_size_rule(config, grid.size());
  if (n_holdout == 0) throw UsageError("no samples left for the selection holdout");
  const SampleBatch holdout = source.draw(n_holdout);
  out.n_holdout = n_holdout;

  const Selection selection = select_best(grid, holdout);
  out.hypothesis = selection.hypothesis;
  out.holdout_error = selection.error;
  out.best_constant_error = std::min(zero_one_error(HalfspaceHypothesis::constant_label(+1, grid.dimension), holdout),
                                     zero_one_error(HalfspaceHypothesis::constant_label(-1, grid.dimension), holdout));
  if (out.holdout_error > out.best_constant_error) {
    throw std::logic_error("selected candidate is worse than a constant hypothesis");
  }
  if (subspace.rank() == 0) out.flags.push_back("empty_subspace");
  out.timings.add("selection", clock.lap());
}

}  // namespace

void ProperLearnerConfig::validate() const {
  if (!(eps > 0.0 && eps < 1.0)) throw ConfigError("eps must be in (0, 1), got " + std::to_string(eps));
  if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("delta must be in (0, 1), got " + std::to_string(delta));
  if (degree && *degree < 0) throw ConfigError("degree must be >= 0");
  if (eta && !(*eta > 0.0)) throw ConfigError("eta must be > 0");
  if (!(degree_constant > 0.0)) throw ConfigError("degree_constant must be > 0");
  if (!(eta_divisor > 0.0)) throw ConfigError("eta_divisor must be > 0");
  if (!(holdout_constant > 0.0)) throw ConfigError("holdout_constant must be > 0");
  if (repeats < 1) throw ConfigError("repeats must be >= 1");
  if (!(validation_fraction >= 0.0 && validation_fraction < 1.0)) {
    throw ConfigError("validation_fraction must be in [0, 1)");
  }
  if (repeats > 1 && validation_fraction == 0.0) {
    throw ConfigError("validation_fraction must be > 0 when repeats > 1");
  }
  if (!(ridge_per_sample >= 0.0)) throw ConfigError("ridge_per_sample must be >= 0");
  if (samples_per_feature == 0) throw ConfigError("samples_per_feature must be >= 1");
}

int default_degree(const ProperLearnerConfig& config, int d, std::size_t n_regression, double* theoretical) {
  const double k_theory = std::ceil(config.degree_constant / std::pow(config.eps, 4));
  if (theoretical) *theoretical = k_theory;
  const double budget = std::min(static_cast<double>(config.feature_cap),
                                 std::max(1.0, static_cast<double>(n_regression) /
                                                   static_cast<double>(config.samples_per_feature)));
  int k = 0;
  while (static_cast<double>(k + 1) <= k_theory && feature_count(d, k + 1) <= budget) ++k;
  return k;
}

ProperRunResult learn_proper_halfspace(const ProperLearnerConfig& config, DataSource& source) {
  config.validate();
  if (config.brute_force) return brute_force_small_d(config, source);
  if (source.mode() != LabelMode::halfspace) throw UsageError("learn_proper_halfspace needs +/-1 labels");
  const int d = source.dimension();

  ProperRunResult out;
  Stopwatch clock;
  const bool finite = finite_source(source);
  const std::size_t total = finite ? source.remaining() : 0;
  std::size_t n_reg = config.n_regression;
  if (n_reg == 0) n_reg = finite ? static_cast<std::size_t>(std::floor(0.6 * static_cast<double>(total)))
                                 : kGeneratorRegressionDefault;
  out.n_regression = n_reg;

  out.degree_used = config.degree ? *config.degree : default_degree(config, d, n_reg, &out.degree_theoretical);
  if (config.degree) out.degree_theoretical = std::ceil(config.degree_constant / std::pow(config.eps, 4));
  out.degree_capped = static_cast<double>(out.degree_used) < out.degree_theoretical;
  if (out.degree_capped) out.flags.push_back("degree_capped");
  out.eta_used = config.eta ? *config.eta : config.eps * config.eps / config.eta_divisor;
  out.brute_force_case = std::pow(1.0 / config.eps, 6) > d;

  const SampleBatch regression = source.draw(n_reg);
  RegressionOptions options;
  options.ridge = config.ridge_per_sample * static_cast<double>(n_reg);
  options.feature_cap = config.feature_cap;
  const BoostedResult fit = boosted_fit(regression, out.degree_used, config.repeats,
                                        config.repeats > 1 ? config.validation_fraction : 0.0, options);
  out.n_features = fit.best.poly.basis().size();
  out.regression_train_loss = fit.best.train_loss;
  out.regression_validation_loss = fit.validation_loss;
  out.fold_validation_losses = fit.fold_validation_losses;
  out.poly_norm_sq = parseval_norm_sq(fit.best.poly);
  out.timings.add("regression", clock.lap());

  const InfluenceMatrix influence = influence_matrix(fit.best.poly);
  out.influence_trace = influence.trace();
  out.subspace = select_subspace(influence, out.eta_used);
  const SymmetricEigen eig = eig_sym(influence.m);
  out.spectrum.assign(eig.values.data(), eig.values.data() + eig.values.size());
  out.timings.add("influence", clock.lap());

  finish_selection(config, out.subspace, source, finite ? total - n_reg : 0, out, clock);
  return out;
}

ProperRunResult brute_force_small_d(const ProperLearnerConfig& config, DataSource& source) {
  config.validate();
  if (source.mode() != LabelMode::halfspace) throw UsageError("brute_force_small_d needs +/-1 labels");
  const int d = source.dimension();
  ProperRunResult out;
  Stopwatch clock;
  out.brute_force = true;
  out.brute_force_case = std::pow(1.0 / config.eps, 6) > d;
  out.subspace = full_space(d);
  out.spectrum.assign(static_cast<std::size_t>(d), 1.0);
  const std::size_t holdout_default = finite_source(source) ? source.remaining() : 0;
  finish_selection(config, out.subspace, source, holdout_default, out, clock);
  return out;
}

}  // namespace agnostic
