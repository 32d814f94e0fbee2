#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "agnostic/cover.hpp"
#include "agnostic/gaussian.hpp"
#include "agnostic/proper.hpp"
#include "agnostic/sample.hpp"
#include "agnostic/timing.hpp"

namespace agnostic {

// Soft localization around w0: accept x with probability
// exp(-(w0.x)^2 (1/sigma^2 - 1) / 2). Accepted points are N(0, Sigma) with
// Sigma = I - (1 - sigma^2) w0 w0^T, and the acceptance rate is sigma.
struct LocalizationParams {
  Eigen::VectorXd w0;
  double sigma = 0.5;
  double gamma = 0.5;
  double alpha = 0.0625;

  // Requires |w0| = 1, 0 < sigma < cos(pi * alpha).
  void validate() const;
};

struct AcceptanceReport {
  std::size_t n_offered = 0;
  std::size_t n_accepted = 0;

  double rate() const noexcept {
    return n_offered == 0 ? 0.0 : static_cast<double>(n_accepted) / static_cast<double>(n_offered);
  }
};

struct InitResult {
  Eigen::VectorXd w0;
  double empirical_error = 0.0;
  double chow_norm = 0.0;
  bool degenerate = false;
};

// Chow-vector initializer: w0 = normalize(mean(y x)), sign chosen by
// empirical error. When |mean(y x)| is within 3 sqrt(d/n) of zero the labels
// carry no linear signal and the top eigenvector of mean(y x x^T) is used
// instead (flagged as degenerate).
InitResult init_constant_factor(const SampleBatch& batch);

double acceptance_probability(double margin, double sigma);

// Coins come from rng positions [p, p + n); advances rng by n.
std::pair<SampleBatch, AcceptanceReport> rejection_sample(const SampleBatch& batch,
                                                          const LocalizationParams& params, RngStream& rng);

// Multiplies points by Sigma^{-1/2} = I + (1/sigma - 1) w0 w0^T.
SampleBatch whiten(const SampleBatch& batch, const LocalizationParams& params);

// Maps sign(w'.x~ + t') on whitened coordinates back to original ones.
HalfspaceHypothesis unwhiten_hypothesis(const HalfspaceHypothesis& h, const LocalizationParams& params);

// Angle in [0, pi] between two nonzero vectors.
double angle_between(const Eigen::VectorXd& u, const Eigen::VectorXd& v);

struct BiasAngleCheck {
  bool pass = false;
  double abs_t = 0.0;
  double angle = 0.0;
  double bound = 0.0;  // kappa * sigma * alpha
};

// Passes iff |t| <= kappa sigma alpha and angle(w, w0) <= kappa sigma alpha.
BiasAngleCheck validate_bias_angle(const HalfspaceHypothesis& h, const LocalizationParams& params,
                                   double kappa = 4.0);

// (1 + sigma^2 tan^2(pi alpha))^{-1/2}
double correlation_lower_bound(double sigma, double alpha);

struct DisagreementEstimate {
  double probability = 0.0;
  double standard_error = 0.0;
  std::size_t n = 0;
};

// Monte Carlo P[h1(x) != h2(x)] for x ~ N(0, I), or x ~ N(0, Sigma) when
// `localized` is given.
DisagreementEstimate disagreement_mc(const HalfspaceHypothesis& h1, const HalfspaceHypothesis& h2,
                                     std::size_t n, RngStream& rng,
                                     const LocalizationParams* localized = nullptr);

// Phi(max(r1, r2)) - Phi(min(r1, r2)).
double gaussian_band_mass(double r1, double r2);

struct PtasConfig {
  double gamma = 0.5;
  double eps = 0.01;
  double delta = 0.1;
  double early_exit_constant = 2.0;  // return h0 when eps > C * OPT_hat
  double sigma_constant = 4.0;       // sigma = C' * OPT_hat / gamma
  double alpha_divisor = 8.0;        // alpha = gamma / alpha_divisor
  double kappa = 4.0;                // validation bound kappa * sigma * alpha
  double sigma_floor = 1e-3;
  std::size_t n_init = 50'000;
  std::size_t n_estimate = 50'000;  // OPT_hat estimate and fallback comparison
  std::size_t n_pool = 200'000;     // offered to rejection sampling
  // Inner proper run on the whitened accepted samples. The accuracy defaults
  // to alpha * gamma; degree and eta are desk-scale overrides.
  std::optional<double> inner_eps;
  int inner_degree = 3;
  double inner_eta = 0.05;
  double inner_regression_fraction = 0.6;
  std::uint64_t seed = 0;

  void validate() const;
  bool operator==(const PtasConfig&) const = default;
};

struct PtasRunResult {
  HalfspaceHypothesis hypothesis;
  HalfspaceHypothesis initial;
  InitResult init;
  double opt_hat = 0.0;
  double initial_error = 0.0;  // h0 on the estimate batch
  double final_error = 0.0;    // returned hypothesis on the estimate batch
  bool early_exit = false;
  std::optional<LocalizationParams> localization;
  double sigma_raw = 0.0;  // C' OPT_hat / gamma before clamping
  AcceptanceReport acceptance;
  std::optional<ProperRunResult> inner;
  std::optional<HalfspaceHypothesis> candidate;
  std::optional<BiasAngleCheck> validation;
  bool fell_back = false;
  std::vector<std::string> flags;
  Timings timings;
};

PtasRunResult learn_ptas(const PtasConfig& config, DataSource& source);

}  // namespace agnostic
