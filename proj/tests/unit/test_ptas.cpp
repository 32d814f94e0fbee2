#include <doctest.h>

#include <cmath>
#include <numbers>

#include "agnostic/datasets.hpp"
#include "agnostic/errors.hpp"
#include "agnostic/parallel.hpp"
#include "agnostic/ptas.hpp"
#include "oracles.hpp"

using namespace agnostic;

namespace {

constexpr double kPi = std::numbers::pi;

struct Planted {
  PlantedModel model;
  SampleBatch batch;
};

Planted planted(int d, std::size_t n, const char* noise, std::uint64_t seed) {
  RngStream rng(seed);
  Planted p;
  p.model = make_planted(LabelMode::halfspace, d, NoiseSpec::parse(noise), rng);
  p.batch = generate(p.model, n, rng).batch;
  return p;
}

LocalizationParams params_for(const Eigen::VectorXd& w0, double sigma, double alpha = 0.0625) {
  LocalizationParams p;
  p.w0 = w0;
  p.sigma = sigma;
  p.alpha = alpha;
  p.gamma = 8 * alpha;
  return p;
}

SampleBatch gaussian_batch(int d, std::size_t n, std::uint64_t seed) {
  RngStream rng(seed);
  SampleBatch b;
  b.x = sample_gaussian(d, n, rng);
  b.y = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(n));
  return b;
}

PtasRunResult run_ptas(const PtasConfig& config, const PlantedModel& model, std::uint64_t seed) {
  PlantedSource source(model, RngStream(seed, 2));
  return learn_ptas(config, source);
}

}  // namespace

TEST_CASE("chow-vector initialization") {
  SUBCASE("clean") {
    const Planted p = planted(5, 100'000, "clean", 1);
    const InitResult r = init_constant_factor(p.batch);
    CHECK_FALSE(r.degenerate);
    CHECK(angle_between(r.w0, p.model.w_star) <= 0.05);
    CHECK(r.chow_norm == doctest::Approx(std::sqrt(2 / kPi)).epsilon(0.02));
  }
  SUBCASE("random classification noise") {
    const Planted p = planted(5, 100'000, "rcn:0.1", 2);
    const InitResult r = init_constant_factor(p.batch);
    CHECK(angle_between(r.w0, p.model.w_star) <= 0.1);
    CHECK(r.chow_norm == doctest::Approx(0.8 * std::sqrt(2 / kPi)).epsilon(0.03));
  }
  SUBCASE("all labels positive") {
    const InitResult r = init_constant_factor(gaussian_batch(4, 20'000, 3));
    CHECK(r.degenerate);
    CHECK(std::abs(r.w0.norm() - 1.0) <= 1e-12);
  }
}

TEST_CASE("acceptance probability") {
  CHECK(acceptance_probability(0.0, 0.3) == 1.0);
  CHECK(acceptance_probability(2.0, 1.0) == 1.0);
  CHECK(acceptance_probability(1.0, 0.5) == doctest::Approx(std::exp(-1.5)));
}

TEST_CASE("rejection sampling rate and moments") {
  const int d = 4;
  Eigen::VectorXd w0 = Eigen::VectorXd::Zero(d);
  w0[1] = 1.0;
  SUBCASE("sigma 0.5 rate") {
    const SampleBatch b = gaussian_batch(d, 1'000'000, 4);
    RngStream coins(4, 77);
    const auto [acc, report] = rejection_sample(b, params_for(w0, 0.5), coins);
    CHECK(report.n_offered == 1'000'000);
    CHECK(std::abs(report.rate() - 0.5) <= 0.0015);
    CHECK(acc.size() == report.n_accepted);
    CHECK(coins.position() == 1'000'000);
  }
  SUBCASE("sigma 0.3 moments") {
    const SampleBatch b = gaussian_batch(d, 1'000'000, 5);
    RngStream coins(5, 77);
    const auto [acc, report] = rejection_sample(b, params_for(w0, 0.3), coins);
    const Eigen::MatrixXd cov = (acc.x.transpose() * acc.x) / static_cast<double>(acc.size());
    CHECK(std::abs(cov(1, 1) - 0.09) <= 0.003);
    CHECK(std::abs(cov(0, 0) - 1.0) <= 0.01);
    CHECK(std::abs(cov(2, 2) - 1.0) <= 0.01);
    CHECK(std::abs(cov(3, 3) - 1.0) <= 0.01);

    const SampleBatch white = whiten(acc, params_for(w0, 0.3));
    const Eigen::MatrixXd wcov = (white.x.transpose() * white.x) / static_cast<double>(white.size());
    CHECK((wcov - Eigen::MatrixXd::Identity(d, d)).cwiseAbs().maxCoeff() <= 0.02);
  }
  SUBCASE("sigma near one accepts everything") {
    const SampleBatch b = gaussian_batch(d, 1000, 6);
    RngStream coins(6, 77);
    const auto [acc, report] = rejection_sample(b, params_for(w0, 0.9999, 0.001), coins);
    CHECK(report.n_accepted >= 995);
  }
  SUBCASE("rate is within three standard errors in most runs") {
    int good = 0;
    for (std::uint64_t s = 0; s < 20; ++s) {
      const SampleBatch b = gaussian_batch(d, 100'000, 100 + s);
      RngStream coins(100 + s, 77);
      const auto [acc, report] = rejection_sample(b, params_for(w0, 0.4), coins);
      good += std::abs(report.rate() - 0.4) <= 3 * oracle::binomial_sd(0.4, 1e5);
    }
    CHECK(good >= 19);
  }
  SUBCASE("thread independence") {
    const SampleBatch b = gaussian_batch(d, 50'000, 7);
    const unsigned before = worker_threads();
    set_worker_threads(1);
    RngStream c1(7, 77);
    const auto r1 = rejection_sample(b, params_for(w0, 0.4), c1);
    set_worker_threads(4);
    RngStream c2(7, 77);
    const auto r2 = rejection_sample(b, params_for(w0, 0.4), c2);
    set_worker_threads(before);
    CHECK((r1.first.x == r2.first.x));
  }
}

TEST_CASE("unwhitening") {
  RngStream rng(8);
  const Eigen::VectorXd w0 = oracle::random_unit(5, rng);
  const LocalizationParams params = params_for(w0, 0.3);
  const HalfspaceHypothesis same = unwhiten_hypothesis(HalfspaceHypothesis{w0, 0.0, 0}, params);
  CHECK((same.w - w0).norm() <= 1e-12);
  CHECK(same.t == 0.0);

  Eigen::VectorXd perp = oracle::random_unit(5, rng);
  perp -= perp.dot(w0) * w0;
  perp.normalize();
  const HalfspaceHypothesis kept = unwhiten_hypothesis(HalfspaceHypothesis{perp, 0.7, 0}, params);
  CHECK((kept.w - perp).norm() <= 1e-12);
  CHECK(kept.t == doctest::Approx(0.7));

  const HalfspaceHypothesis constant = unwhiten_hypothesis(HalfspaceHypothesis::constant_label(-1, 5), params);
  CHECK(constant.constant == -1);

  // h' on whitened points predicts exactly what the unwhitened h predicts on the originals.
  const SampleBatch b = gaussian_batch(5, 20'000, 9);
  const SampleBatch white = whiten(b, params);
  for (int trial = 0; trial < 10; ++trial) {
    const HalfspaceHypothesis h{oracle::random_unit(5, rng), rng.normal() * 0.5, 0};
    const HalfspaceHypothesis back = unwhiten_hypothesis(h, params);
    CHECK(std::abs(back.w.norm() - 1.0) <= 1e-12);
    std::size_t mismatch = 0;
    for (std::size_t i = 0; i < b.size(); ++i) {
      const double margin = h.w.dot(white.x.row(static_cast<Eigen::Index>(i)).transpose()) + h.t;
      if (std::abs(margin) > 1e-9 && h.predict(white.point(i)) != back.predict(b.point(i))) ++mismatch;
    }
    CHECK(mismatch == 0);
  }
  CHECK_THROWS_AS(whiten(b, params_for(w0, 0.0)), UsageError);
}

TEST_CASE("bias and angle validation") {
  const Eigen::VectorXd w0 = Eigen::Vector3d(0, 0, 1);
  const LocalizationParams params = params_for(w0, 0.4);
  const BiasAngleCheck ok = validate_bias_angle(HalfspaceHypothesis{w0, 0.0, 0}, params);
  CHECK(ok.pass);
  CHECK(ok.angle == 0.0);
  CHECK(ok.bound == doctest::Approx(4 * 0.4 * 0.0625));

  LocalizationParams tight = params_for(w0, 0.16, 0.0625);
  CHECK(tight.sigma * tight.alpha == doctest::Approx(0.01));
  const BiasAngleCheck bad = validate_bias_angle(HalfspaceHypothesis{Eigen::Vector3d(1, 0, 0), 0.0, 0}, tight);
  CHECK_FALSE(bad.pass);
  CHECK(bad.angle == doctest::Approx(kPi / 2));

  const BiasAngleCheck biased = validate_bias_angle(HalfspaceHypothesis{w0, 0.2, 0}, params);
  CHECK_FALSE(biased.pass);
  CHECK_FALSE(validate_bias_angle(HalfspaceHypothesis::constant_label(1, 3), params).pass);
}

TEST_CASE("disagreement and band mass") {
  RngStream rng(10);
  const HalfspaceHypothesis e1{Eigen::Vector2d(1, 0), 0.0, 0};
  const HalfspaceHypothesis e2{Eigen::Vector2d(0, 1), 0.0, 0};
  const DisagreementEstimate est = disagreement_mc(e1, e2, 100'000, rng);
  // sign(x1) != sign(x2) on two of the four quadrants: theta / pi = 1/2.
  CHECK(std::abs(est.probability - 0.5) <= 0.005);
  CHECK(angle_between(e1.w, e2.w) / kPi == doctest::Approx(0.5));
  CHECK(disagreement_mc(e1, e1, 10'000, rng).probability == 0.0);
  CHECK(gaussian_band_mass(0.0, 1.0) == doctest::Approx(0.3413447461));
  CHECK(gaussian_band_mass(1.0, 0.0) == gaussian_band_mass(0.0, 1.0));
  CHECK_THROWS_AS(disagreement_mc(e1, e2, 0, rng), UsageError);
}

TEST_CASE("disagreement of a homogeneous and a biased halfspace is at least the angle over pi") {
  RngStream rng(11);
  const std::size_t n = 100'000;
  for (int pair = 0; pair < 20; ++pair) {
    const int d = 2 + pair % 4;
    const HalfspaceHypothesis h0{oracle::random_unit(d, rng), 0.0, 0};
    Eigen::VectorXd v = oracle::random_unit(d, rng);
    if (v.dot(h0.w) < 0.0) v = -v;  // the bound needs theta <= pi/2
    const HalfspaceHypothesis h1{v, rng.normal(), 0};
    const DisagreementEstimate est = disagreement_mc(h0, h1, n, rng);
    const double theta = angle_between(h0.w, h1.w) / kPi;
    CHECK(est.probability >= theta - 3 * oracle::binomial_sd(theta, static_cast<double>(n)));
  }
}

TEST_CASE("the angle bound reverses past a right angle") {
  // Opposite normals with a large bias: h1 is almost constant, so the
  // disagreement is about 1/2 while theta / pi = 1.
  RngStream rng(21);
  const HalfspaceHypothesis h0{Eigen::Vector2d(1, 0), 0.0, 0};
  const HalfspaceHypothesis h1{Eigen::Vector2d(-1, 0), 6.0, 0};
  const DisagreementEstimate est = disagreement_mc(h0, h1, 100'000, rng);
  CHECK(angle_between(h0.w, h1.w) == doctest::Approx(kPi));
  CHECK(std::abs(est.probability - 0.5) <= 0.01);
}

TEST_CASE("localized disagreement is at least the band mass between normalized biases") {
  RngStream rng(12);
  const std::size_t n = 100'000;
  for (int pair = 0; pair < 20; ++pair) {
    const int d = 2 + pair % 4;
    const LocalizationParams params = params_for(oracle::random_unit(d, rng), 0.1 + 0.8 * rng.uniform());
    const HalfspaceHypothesis h1{oracle::random_unit(d, rng), rng.normal(), 0};
    const HalfspaceHypothesis h2{oracle::random_unit(d, rng), rng.normal(), 0};
    auto scaled_bias = [&](const HalfspaceHypothesis& h) {
      const Eigen::VectorXd sw = h.w - (1.0 - params.sigma) * h.w.dot(params.w0) * params.w0;
      return h.t / sw.norm();
    };
    const double band = gaussian_band_mass(scaled_bias(h1), scaled_bias(h2));
    const DisagreementEstimate est = disagreement_mc(h1, h2, n, rng, &params);
    CHECK(est.probability >= band - 3 * oracle::binomial_sd(band, static_cast<double>(n)));
  }
}

TEST_CASE("rejected disagreement near w0 is small relative to alpha times opt") {
  // For h' with |t| <= sigma alpha and angle(w, w0) <= sigma alpha, measure
  // E[1{h0(x) != h'(x)} (1 - acceptance(x))] with the exact rejection weight.
  const double opt = 0.05;
  const double gamma = 0.5;
  const double alpha = gamma / 8;
  const double sigma = 4 * opt / gamma;
  const double kappa = 10.0;
  RngStream rng(13);
  for (int trial = 0; trial < 20; ++trial) {
    const int d = 4;
    const Eigen::VectorXd w0 = oracle::random_unit(d, rng);
    Eigen::VectorXd u = oracle::random_unit(d, rng);
    u -= u.dot(w0) * w0;
    u.normalize();
    const double angle = sigma * alpha * rng.uniform();
    const HalfspaceHypothesis h{std::cos(angle) * w0 + std::sin(angle) * u, sigma * alpha * (2 * rng.uniform() - 1), 0};
    const HalfspaceHypothesis h0{w0, 0.0, 0};
    const SampleBatch b = gaussian_batch(d, 200'000, 200 + static_cast<std::uint64_t>(trial));
    double acc = 0.0;
    for (std::size_t i = 0; i < b.size(); ++i) {
      if (h0.predict(b.point(i)) == h.predict(b.point(i))) continue;
      acc += 1.0 - acceptance_probability(w0.dot(b.x.row(static_cast<Eigen::Index>(i)).transpose()), sigma);
    }
    CHECK(acc / static_cast<double>(b.size()) <= kappa * alpha * opt);
  }
}

TEST_CASE("correlation lower bound") {
  CHECK(correlation_lower_bound(0.0, 0.1) == 1.0);
  CHECK(correlation_lower_bound(0.5, 0.0625) ==
        doctest::Approx(1 / std::sqrt(1 + 0.25 * std::pow(std::tan(kPi * 0.0625), 2))));
}

TEST_CASE("localized run on band-flip data") {
  RngStream rng(14);
  const PlantedModel model = make_planted(LabelMode::halfspace, 4, NoiseSpec::parse("band_flip:0.06270677"), rng);
  CHECK(planted_error(model).value() == doctest::Approx(0.05).epsilon(1e-6));
  PtasConfig config;
  config.seed = 14;
  const PtasRunResult r = run_ptas(config, model, 14);
  CHECK_FALSE(r.early_exit);
  REQUIRE(r.localization.has_value());
  REQUIRE(r.inner.has_value());
  CHECK(r.localization->alpha == doctest::Approx(0.0625));
  CHECK(std::abs(r.acceptance.rate() - r.localization->sigma) <=
        4 * oracle::binomial_sd(r.localization->sigma, static_cast<double>(r.acceptance.n_offered)));
  RngStream test_rng(14, 3);
  const SampleBatch test = generate(model, 100'000, test_rng).batch;
  CHECK(zero_one_error(r.hypothesis, test) <= 0.10);
  if (r.validation->pass) {
    CHECK(r.hypothesis.w.dot(r.localization->w0) >=
          correlation_lower_bound(r.localization->sigma, r.localization->alpha) - 1e-9);
  }
}

TEST_CASE("clean data exits early") {
  RngStream rng(15);
  const PlantedModel model = make_planted(LabelMode::halfspace, 4, NoiseSpec::parse("clean"), rng);
  PtasConfig config;
  config.eps = 0.1;
  const PtasRunResult r = run_ptas(config, model, 15);
  CHECK(r.early_exit);
  CHECK((r.hypothesis.w == r.initial.w));
  RngStream test_rng(15, 3);
  CHECK(zero_one_error(r.hypothesis, generate(model, 50'000, test_rng).batch) <= 0.05);
}

TEST_CASE("ptas runs are deterministic across thread counts") {
  RngStream rng(16);
  const PlantedModel model = make_planted(LabelMode::halfspace, 3, NoiseSpec::parse("rcn:0.05"), rng);
  PtasConfig config;
  config.seed = 16;
  config.n_pool = 60'000;
  const unsigned before = worker_threads();
  set_worker_threads(1);
  const PtasRunResult a = run_ptas(config, model, 16);
  set_worker_threads(3);
  const PtasRunResult b = run_ptas(config, model, 16);
  set_worker_threads(before);
  CHECK((a.hypothesis.w == b.hypothesis.w));
  CHECK(a.hypothesis.t == b.hypothesis.t);
  CHECK(a.acceptance.n_accepted == b.acceptance.n_accepted);
  CHECK(a.final_error == b.final_error);
}

TEST_CASE("ptas configuration errors") {
  PtasConfig config;
  config.gamma = 0.0;
  CHECK_THROWS_AS(config.validate(), ConfigError);
  config = {};
  config.alpha_divisor = 2.0;
  CHECK_THROWS_AS(config.validate(), ConfigError);
  config = {};
  config.n_pool = 0;
  CHECK_THROWS_AS(config.validate(), ConfigError);
  LocalizationParams p = params_for(Eigen::Vector2d(1, 0), 0.999, 0.2);
  CHECK_THROWS_AS(p.validate(), UsageError);
}
