#include "agnostic/ptas.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "agnostic/errors.hpp"
#include "agnostic/influence.hpp"
#include "agnostic/parallel.hpp"

namespace agnostic {
namespace {

constexpr std::uint64_t kRejectionStream = 0x4C4F43414CULL;  // "LOCAL"

double sign_error(const Eigen::VectorXd& w, const SampleBatch& batch) {
  return zero_one_error(HalfspaceHypothesis{w, 0.0, 0}, batch);
}

}  // namespace

void LocalizationParams::validate() const {
  if (w0.size() < 1 || std::abs(w0.norm() - 1.0) > 1e-9) throw UsageError("localization w0 must be a unit vector");
  if (!(sigma > 0.0)) throw UsageError("localization sigma must be > 0");
  if (!(alpha > 0.0 && alpha < 0.5)) throw UsageError("localization alpha must be in (0, 1/2)");
  if (!(sigma < std::cos(std::numbers::pi * alpha))) {
    throw UsageError("localization sigma must be below cos(pi * alpha)");
  }
}

InitResult init_constant_factor(const SampleBatch& batch) {
  if (batch.empty()) throw UsageError("init_constant_factor needs samples");
  const int d = batch.dimension();
  const auto n = static_cast<double>(batch.size());
  const Eigen::VectorXd chow = batch.x.transpose() * batch.y / n;

  InitResult out;
  out.chow_norm = chow.norm();
  Eigen::VectorXd w;
  if (out.chow_norm > 3.0 * std::sqrt(static_cast<double>(d) / n)) {
    w = chow / out.chow_norm;
  } else {
    out.degenerate = true;
    const Eigen::MatrixXd second = batch.x.transpose() * batch.y.asDiagonal() * batch.x / n;
    w = eig_sym(0.5 * (second + second.transpose())).vectors.col(0);
  }
  const double err_plus = sign_error(w, batch);
  const double err_minus = sign_error(-w, batch);
  if (err_minus < err_plus) w = -w;
  out.w0 = w;
  out.empirical_error = std::min(err_plus, err_minus);
  return out;
}

double acceptance_probability(double margin, double sigma) {
  return std::exp(-0.5 * margin * margin * (1.0 / (sigma * sigma) - 1.0));
}

std::pair<SampleBatch, AcceptanceReport> rejection_sample(const SampleBatch& batch,
                                                          const LocalizationParams& params, RngStream& rng) {
  params.validate();
  if (batch.dimension() != params.w0.size()) throw UsageError("rejection_sample: dimension mismatch");
  const std::size_t n = batch.size();
  const std::uint64_t start = rng.position();
  rng.skip(n);
  const Eigen::VectorXd z = margins(params.w0, batch.x);

  std::vector<unsigned char> keep(n, 0);
  parallel_for(block_count(n), [&](std::size_t b) {
    const std::size_t lo = b * kSampleBlock;
    const std::size_t hi = std::min(n, lo + kSampleBlock);
    for (std::size_t i = lo; i < hi; ++i) {
      keep[i] = rng.uniform_at(start + i) < acceptance_probability(z[static_cast<Eigen::Index>(i)], params.sigma);
    }
  });

  AcceptanceReport report;
  report.n_offered = n;
  report.n_accepted = static_cast<std::size_t>(std::count(keep.begin(), keep.end(), 1));
  SampleBatch accepted;
  accepted.mode = batch.mode;
  accepted.x.resize(static_cast<Eigen::Index>(report.n_accepted), batch.x.cols());
  accepted.y.resize(static_cast<Eigen::Index>(report.n_accepted));
  Eigen::Index row = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!keep[i]) continue;
    accepted.x.row(row) = batch.x.row(static_cast<Eigen::Index>(i));
    accepted.y[row] = batch.y[static_cast<Eigen::Index>(i)];
    ++row;
  }
  return {std::move(accepted), report};
}

SampleBatch whiten(const SampleBatch& batch, const LocalizationParams& params) {
  if (!(params.sigma > 0.0)) throw UsageError("whiten: sigma must be > 0");
  if (batch.dimension() != params.w0.size()) throw UsageError("whiten: dimension mismatch");
  SampleBatch out = batch;
  const Eigen::VectorXd z = margins(params.w0, batch.x);
  const double stretch = 1.0 / params.sigma - 1.0;
  out.x.noalias() += stretch * z * params.w0.transpose();
  return out;
}

HalfspaceHypothesis unwhiten_hypothesis(const HalfspaceHypothesis& h, const LocalizationParams& params) {
  if (!(params.sigma > 0.0)) throw UsageError("unwhiten: sigma must be > 0");
  if (h.is_constant()) return h;
  const Eigen::VectorXd mapped = h.w + (1.0 / params.sigma - 1.0) * params.w0.dot(h.w) * params.w0;
  const double norm = mapped.norm();
  return HalfspaceHypothesis{mapped / norm, h.t / norm, 0};
}

double angle_between(const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
  const double c = u.dot(v) / (u.norm() * v.norm());
  return std::acos(std::clamp(c, -1.0, 1.0));
}

BiasAngleCheck validate_bias_angle(const HalfspaceHypothesis& h, const LocalizationParams& params, double kappa) {
  BiasAngleCheck out;
  out.bound = kappa * params.sigma * params.alpha;
  if (h.is_constant()) {
    out.abs_t = std::numeric_limits<double>::infinity();
    out.angle = std::numbers::pi;
    out.pass = false;
    return out;
  }
  out.abs_t = std::abs(h.t);
  out.angle = angle_between(h.w, params.w0);
  out.pass = out.abs_t <= out.bound && out.angle <= out.bound;
  return out;
}

double correlation_lower_bound(double sigma, double alpha) {
  const double tan_term = std::tan(std::numbers::pi * alpha);
  return 1.0 / std::sqrt(1.0 + sigma * sigma * tan_term * tan_term);
}

DisagreementEstimate disagreement_mc(const HalfspaceHypothesis& h1, const HalfspaceHypothesis& h2, std::size_t n,
                                     RngStream& rng, const LocalizationParams* localized) {
  if (n == 0) throw UsageError("disagreement_mc needs n >= 1");
  const int d = static_cast<int>(h1.is_constant() ? h2.w.size() : h1.w.size());
  const std::uint64_t start = rng.position();
  rng.skip(static_cast<std::uint64_t>(n) * static_cast<std::uint64_t>(d));

  std::vector<std::uint64_t> counts(block_count(n), 0);
  parallel_for(counts.size(), [&](std::size_t b) {
    const std::size_t lo = b * kSampleBlock;
    const std::size_t hi = std::min(n, lo + kSampleBlock);
    std::vector<double> x(static_cast<std::size_t>(d));
    for (std::size_t i = lo; i < hi; ++i) {
      for (int j = 0; j < d; ++j) {
        x[static_cast<std::size_t>(j)] = rng.normal_at(start + i * static_cast<std::size_t>(d) + static_cast<std::size_t>(j));
      }
      if (localized) {
        // Sigma^{1/2} x = x - (1 - sigma)(w0.x) w0
        const double proj = dot({localized->w0.data(), x.size()}, x);
        for (int j = 0; j < d; ++j) x[static_cast<std::size_t>(j)] -= (1.0 - localized->sigma) * proj * localized->w0[j];
      }
      if (h1.predict(x) != h2.predict(x)) ++counts[b];
    }
  });
  std::uint64_t total = 0;
  for (auto c : counts) total += c;
  DisagreementEstimate out;
  out.n = n;
  out.probability = static_cast<double>(total) / static_cast<double>(n);
  out.standard_error = std::sqrt(out.probability * (1.0 - out.probability) / static_cast<double>(n));
  return out;
}

double gaussian_band_mass(double r1, double r2) {
  return std_normal_cdf(std::max(r1, r2)) - std_normal_cdf(std::min(r1, r2));
}

void PtasConfig::validate() const {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("gamma must be in (0, 1]");
  if (!(eps > 0.0 && eps < 1.0)) throw ConfigError("eps must be in (0, 1)");
  if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("delta must be in (0, 1)");
  if (!(early_exit_constant > 0.0)) throw ConfigError("early_exit_constant must be > 0");
  if (!(sigma_constant > 0.0)) throw ConfigError("sigma_constant must be > 0");
  if (!(alpha_divisor > 2.0)) throw ConfigError("alpha_divisor must be > 2");
  if (!(kappa > 0.0)) throw ConfigError("kappa must be > 0");
  if (!(sigma_floor > 0.0 && sigma_floor < 1.0)) throw ConfigError("sigma_floor must be in (0, 1)");
  if (n_init == 0 || n_estimate == 0 || n_pool == 0) throw ConfigError("sample counts must be >= 1");
  if (inner_eps && !(*inner_eps > 0.0 && *inner_eps < 1.0)) throw ConfigError("inner_eps must be in (0, 1)");
  if (inner_degree < 0) throw ConfigError("inner_degree must be >= 0");
  if (!(inner_eta > 0.0)) throw ConfigError("inner_eta must be > 0");
  if (!(inner_regression_fraction > 0.0 && inner_regression_fraction < 1.0)) {
    throw ConfigError("inner_regression_fraction must be in (0, 1)");
  }
}

PtasRunResult learn_ptas(const PtasConfig& config, DataSource& source) {
  config.validate();
  if (source.mode() != LabelMode::halfspace) throw UsageError("learn_ptas needs +/-1 labels");
  PtasRunResult out;
  Stopwatch clock;

  const SampleBatch init_batch = source.draw(config.n_init);
  out.init = init_constant_factor(init_batch);
  if (out.init.degenerate) out.flags.push_back("init_degenerate");
  out.initial = HalfspaceHypothesis{out.init.w0, 0.0, 0};
  const SampleBatch estimate = source.draw(config.n_estimate);
  out.initial_error = zero_one_error(out.initial, estimate);
  out.opt_hat = std::max(out.initial_error, config.eps / 10.0);
  out.timings.add("init", clock.lap());

  if (config.eps > config.early_exit_constant * out.opt_hat) {
    out.early_exit = true;
    out.hypothesis = out.initial;
    out.final_error = out.initial_error;
    return out;
  }

  LocalizationParams params;
  params.w0 = out.init.w0;
  params.gamma = config.gamma;
  params.alpha = config.gamma / config.alpha_divisor;
  out.sigma_raw = config.sigma_constant * out.opt_hat / config.gamma;
  const double sigma_cap = 0.99 * std::cos(std::numbers::pi * params.alpha);
  params.sigma = std::clamp(out.sigma_raw, config.sigma_floor, sigma_cap);
  if (params.sigma != out.sigma_raw) out.flags.push_back("sigma_clamped");
  out.localization = params;

  RngStream coins(config.seed, kRejectionStream);
  const SampleBatch pool = source.draw(config.n_pool);
  auto [accepted, acceptance] = rejection_sample(pool, params, coins);
  out.acceptance = acceptance;
  const SampleBatch whitened = whiten(accepted, params);
  out.timings.add("localization", clock.lap());

  ProperLearnerConfig inner;
  inner.eps = config.inner_eps ? *config.inner_eps : params.alpha * config.gamma;
  inner.delta = config.delta;
  inner.degree = config.inner_degree;
  inner.eta = config.inner_eta;
  inner.n_regression = static_cast<std::size_t>(std::floor(config.inner_regression_fraction *
                                                           static_cast<double>(whitened.size())));
  inner.n_holdout = whitened.size() - inner.n_regression;
  BatchSource inner_source(whitened);
  out.inner = learn_proper_halfspace(inner, inner_source);
  out.timings.add("inner", clock.lap());

  out.candidate = unwhiten_hypothesis(out.inner->hypothesis, params);
  out.validation = validate_bias_angle(*out.candidate, params, config.kappa);
  const double candidate_error = zero_one_error(*out.candidate, estimate);
  if (out.validation->pass) {
    out.hypothesis = *out.candidate;
    out.final_error = candidate_error;
  } else {
    out.flags.push_back("validation_failed");
    out.fell_back = true;
    if (candidate_error < out.initial_error) {
      out.hypothesis = *out.candidate;
      out.final_error = candidate_error;
    } else {
      out.hypothesis = out.initial;
      out.final_error = out.initial_error;
    }
  }
  out.timings.add("validation", clock.lap());
  return out;
}

}  // namespace agnostic
