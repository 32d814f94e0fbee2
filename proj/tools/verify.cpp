#include "verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <numbers>
#include <sstream>

#include "agnostic/datasets.hpp"
#include "agnostic/errors.hpp"
#include "agnostic/hermite.hpp"
#include "agnostic/influence.hpp"
#include "agnostic/ptas.hpp"
#include "agnostic/regression.hpp"
#include "agnostic/relu.hpp"

namespace agnostic::cli {
namespace {

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

Check make(const std::string& suite, const std::string& name, bool pass, const std::string& detail) {
  return Check{suite, name, pass, detail};
}

// Tensor Gauss-Hermite rule in d dimensions.
void tensor_rule(int d, int q, PointMatrix& nodes, std::vector<double>& weights) {
  const QuadratureRule rule = gauss_hermite_rule(q);
  std::size_t total = 1;
  for (int i = 0; i < d; ++i) total *= static_cast<std::size_t>(q);
  nodes.resize(static_cast<Eigen::Index>(total), d);
  weights.assign(total, 1.0);
  for (std::size_t p = 0; p < total; ++p) {
    std::size_t rest = p;
    for (int i = 0; i < d; ++i) {
      const std::size_t j = rest % static_cast<std::size_t>(q);
      rest /= static_cast<std::size_t>(q);
      nodes(static_cast<Eigen::Index>(p), i) = rule.nodes[j];
      weights[p] *= rule.weights[j];
    }
  }
}

HermitePoly random_poly(int d, int k, RngStream& rng) {
  auto basis = std::make_shared<const HermiteBasis>(d, k);
  Eigen::VectorXd c(static_cast<Eigen::Index>(basis->size()));
  for (Eigen::Index i = 0; i < c.size(); ++i) c[i] = rng.normal();
  return HermitePoly(basis, c / c.norm());
}

std::vector<Check> hermite_suite(RngStream& rng) {
  std::vector<Check> out;
  double worst = 0.0;
  for (int d = 1; d <= 3; ++d) {
    const HermiteBasis basis(d, 6);
    PointMatrix nodes;
    std::vector<double> weights;
    tensor_rule(d, 8, nodes, weights);
    const PointMatrix phi = basis.feature_block(nodes, 0, static_cast<std::size_t>(nodes.rows()));
    const Eigen::Map<const Eigen::VectorXd> w(weights.data(), static_cast<Eigen::Index>(weights.size()));
    const Eigen::MatrixXd gram = phi.transpose() * w.asDiagonal() * phi;
    worst = std::max(worst, (gram - Eigen::MatrixXd::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff());
  }
  out.push_back(make("hermite", "orthonormality", worst <= 1e-10, "max |G - I| = " + sci(worst)));

  const HermitePoly p = random_poly(3, 4, rng);
  double grad_err = 0.0;
  const double h = 1e-2;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> x(3);
    for (double& v : x) v = rng.normal();
    for (int i = 0; i < 3; ++i) {
      const HermitePoly g = gradient_coeffs(p, i);
      auto at = [&](double shift) {
        std::vector<double> y = x;
        y[static_cast<std::size_t>(i)] += shift;
        return p(y);
      };
      // Five-point stencil, exact for degree <= 4 up to rounding.
      const double fd = (-at(2 * h) + 8 * at(h) - 8 * at(-h) + at(-2 * h)) / (12 * h);
      grad_err = std::max(grad_err, std::abs(fd - g(x)));
    }
  }
  out.push_back(make("hermite", "gradient_identity", grad_err <= 1e-8, "max error = " + sci(grad_err)));

  const HermitePoly q = random_poly(4, 5, rng);
  const double trace_gap = std::abs(influence_matrix(q).trace() - influence_trace(q));
  out.push_back(make("hermite", "trace_identity", trace_gap <= 1e-12, "|tr M - sum |a| c^2| = " + sci(trace_gap)));
  return out;
}

std::vector<Check> regression_suite(RngStream& rng) {
  PlantedModel model = make_planted(LabelMode::halfspace, 3, NoiseSpec::parse("rcn:0.1"), rng);
  const SampleBatch batch = generate(model, 20'000, rng).batch;
  const RegressionResult fit = fit_l2(batch, 3);
  const PointMatrix phi = fit.poly.basis().feature_block(batch.x, 0, batch.size());
  const Eigen::VectorXd residual = batch.y - phi * fit.poly.coeffs();
  const double kkt = (phi.transpose() * residual).cwiseAbs().maxCoeff() /
                     (phi.transpose() * batch.y).cwiseAbs().maxCoeff();
  std::vector<Check> out;
  out.push_back(make("regression", "kkt_residual", kkt <= 1e-6, "relative residual = " + sci(kkt)));
  double previous = std::numeric_limits<double>::infinity();
  bool monotone = true;
  std::ostringstream losses;
  for (int k = 0; k <= 4; ++k) {
    const double l = fit_l2(batch, k).train_loss;
    monotone = monotone && l <= previous + 1e-12;
    previous = l;
    losses << (k ? "," : "") << sci(l);
  }
  out.push_back(make("regression", "degree_monotone", monotone, "train losses " + losses.str()));
  return out;
}

std::vector<Check> influence_suite(RngStream& rng) {
  const HermitePoly p = random_poly(5, 3, rng);
  const InfluenceMatrix m = influence_matrix(p);
  const SymmetricEigen eig = eig_sym(m.m);
  const Eigen::MatrixXd rebuilt = eig.vectors * eig.values.asDiagonal() * eig.vectors.transpose();
  const double recon = (rebuilt - m.m).cwiseAbs().maxCoeff();
  const double ortho =
      (eig.vectors.transpose() * eig.vectors - Eigen::MatrixXd::Identity(5, 5)).cwiseAbs().maxCoeff();
  const double min_eig = eig.values.minCoeff();
  std::vector<Check> out;
  out.push_back(make("influence", "eigen_reconstruction", recon <= 1e-10 && ortho <= 1e-10,
                     "reconstruction " + sci(recon) + ", orthogonality " + sci(ortho)));
  out.push_back(make("influence", "psd", min_eig >= -1e-12, "min eigenvalue " + sci(min_eig)));
  const Subspace s = select_subspace(m, 0.05);
  out.push_back(make("influence", "rank_bound", s.rank() * 0.05 <= m.trace() + 1e-12,
                     "rank " + std::to_string(s.rank()) + ", trace " + sci(m.trace())));
  return out;
}

std::vector<Check> cover_suite(RngStream& rng) {
  std::vector<Check> out;
  for (int m = 1; m <= 3; ++m) {
    const double eps = 0.2;
    const auto cover = unit_ball_cover(m, eps);
    double worst = 0.0;
    for (int trial = 0; trial < 2000; ++trial) {
      Eigen::VectorXd u(m);
      for (int i = 0; i < m; ++i) u[i] = rng.normal();
      u.normalize();
      double best = std::numeric_limits<double>::infinity();
      for (const auto& c : cover) best = std::min(best, (c - u).norm());
      worst = std::max(worst, best);
    }
    const double bound = std::pow(cover_size_constant(m) / eps, m);
    out.push_back(make("cover", "radius_m" + std::to_string(m), worst <= eps,
                       "max distance " + sci(worst) + ", size " + std::to_string(cover.size())));
    out.push_back(make("cover", "size_m" + std::to_string(m), static_cast<double>(cover.size()) <= bound,
                       "size " + std::to_string(cover.size()) + " <= " + sci(bound)));
  }
  return out;
}

std::vector<Check> localization_suite(RngStream& rng) {
  const int d = 4;
  const std::size_t n = 100'000;
  SampleBatch batch;
  batch.x = sample_gaussian(d, n, rng);
  batch.y = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(n));
  LocalizationParams params;
  params.w0 = Eigen::VectorXd::Unit(d, 0);
  params.sigma = 0.5;
  params.alpha = 0.0625;
  const auto [accepted, report] = rejection_sample(batch, params, rng);
  const double sd = std::sqrt(params.sigma * (1 - params.sigma) / static_cast<double>(n));
  const double gap = std::abs(report.rate() - params.sigma);
  std::vector<Check> out;
  out.push_back(make("localization", "acceptance_rate", gap <= 3 * sd,
                     "rate " + sci(report.rate()) + ", 3 sd " + sci(3 * sd)));
  const Eigen::VectorXd z = margins(params.w0, accepted.x);
  const double var = z.squaredNorm() / static_cast<double>(z.size());
  out.push_back(make("localization", "variance_along_w0", std::abs(var / 0.25 - 1) <= 0.05,
                     "variance " + sci(var) + " vs sigma^2 0.25"));
  return out;
}

std::vector<Check> relu_suite() {
  std::vector<Check> out;
  const double c0 = relu_hermite_1d(0);
  const double c1 = relu_hermite_1d(1);
  out.push_back(make("relu", "c0", std::abs(c0 - 1 / std::sqrt(2 * std::numbers::pi)) <= 1e-6, "c0 = " + sci(c0)));
  out.push_back(make("relu", "c1", std::abs(c1 - 0.5) <= 1e-6, "c1 = " + sci(c1)));
  bool decreasing = true;
  double previous = std::numeric_limits<double>::infinity();
  std::ostringstream tails;
  for (int k : {4, 8, 16, 32}) {
    const double t = relu_hermite_tail(k);
    decreasing = decreasing && t < previous;
    previous = t;
    tails << (k == 4 ? "" : ",") << sci(t);
  }
  out.push_back(make("relu", "tail_decreasing", decreasing, "tails " + tails.str()));
  return out;
}

std::vector<Check> datasets_suite(RngStream& rng) {
  std::vector<Check> out;
  PlantedModel model = make_planted(LabelMode::halfspace, 3, NoiseSpec::parse("rcn:0.1"), rng);
  const std::size_t n = 100'000;
  const GeneratedBatch g = generate(model, n, rng);
  const double rate = static_cast<double>(g.n_corrupted) / static_cast<double>(n);
  const double sd = std::sqrt(0.1 * 0.9 / static_cast<double>(n));
  out.push_back(make("datasets", "rcn_rate", std::abs(rate - 0.1) <= 3 * sd, "flip rate " + sci(rate)));
  std::stringstream csv;
  const SampleBatch small = g.batch.slice(0, 100);
  write_csv(small, csv);
  const SampleBatch back = read_csv(csv);
  out.push_back(make("datasets", "csv_round_trip", back.x == small.x && back.y == small.y, "100 rows"));
  return out;
}

}  // namespace

std::vector<std::string> suite_names() {
  return {"hermite", "regression", "influence", "cover", "localization", "relu", "datasets"};
}

std::vector<Check> run_suite(const std::string& suite, unsigned long long seed) {
  RngStream rng(seed, 0x564552494659ULL);
  if (suite == "hermite") return hermite_suite(rng);
  if (suite == "regression") return regression_suite(rng);
  if (suite == "influence") return influence_suite(rng);
  if (suite == "cover") return cover_suite(rng);
  if (suite == "localization") return localization_suite(rng);
  if (suite == "relu") return relu_suite();
  if (suite == "datasets") return datasets_suite(rng);
  if (suite == "all") {
    std::vector<Check> out;
    for (const std::string& name : suite_names()) {
      auto part = run_suite(name, seed);
      out.insert(out.end(), part.begin(), part.end());
    }
    return out;
  }
  throw ConfigError("unknown suite '" + suite + "'");
}

}  // namespace agnostic::cli
