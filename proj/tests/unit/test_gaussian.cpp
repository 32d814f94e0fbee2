#include <doctest.h>

#include <cmath>
#include <numeric>

#include "agnostic/errors.hpp"
#include "agnostic/gaussian.hpp"
#include "agnostic/parallel.hpp"
#include "oracles.hpp"

using namespace agnostic;

TEST_CASE("rng streams are pure functions of seed, stream and position") {
  RngStream a(42, 7);
  RngStream b(42, 7);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
  RngStream c(42, 8);
  RngStream d(43, 7);
  CHECK(RngStream(42, 7).u64_at(5) != c.u64_at(5));
  CHECK(RngStream(42, 7).u64_at(5) != d.u64_at(5));
  // Random access agrees with sequential consumption.
  RngStream e(1, 2);
  e.skip(10);
  CHECK(e.normal() == RngStream(1, 2).normal_at(10));
  // Interleaving other streams does not disturb a stream.
  RngStream f(9), g(9), other(9, 1);
  std::vector<double> lone, mixed;
  for (int i = 0; i < 20; ++i) lone.push_back(f.normal());
  for (int i = 0; i < 20; ++i) {
    other.normal();
    mixed.push_back(g.normal());
  }
  CHECK(lone == mixed);
}

TEST_CASE("substreams are distinct and reproducible") {
  const RngStream root(5);
  CHECK(root.substream(1).stream_id() == root.substream(1).stream_id());
  CHECK(root.substream(1).stream_id() != root.substream(2).stream_id());
  CHECK(root.substream(1).substream(1).stream_id() != root.substream(1).stream_id());
}

TEST_CASE("uniforms lie in the open unit interval") {
  RngStream r(3);
  for (int i = 0; i < 100000; ++i) {
    const double u = r.uniform();
    REQUIRE(u > 0.0);
    REQUIRE(u < 1.0);
  }
}

TEST_CASE("gaussian sample moments") {
  SUBCASE("d=2 means") {
    RngStream rng(11);
    const PointMatrix x = sample_gaussian(2, 1'000'000, rng);
    for (int j = 0; j < 2; ++j) CHECK(std::abs(x.col(j).mean()) <= 0.005);
    for (int j = 0; j < 2; ++j) CHECK(std::abs(x.col(j).squaredNorm() / 1e6 - 1.0) <= 0.006);
  }
  SUBCASE("d=3 covariance") {
    RngStream rng(12);
    const PointMatrix x = sample_gaussian(3, 1'000'000, rng);
    const Eigen::MatrixXd cov = x.transpose() * x / 1e6;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        if (i != j) CHECK(std::abs(cov(i, j)) <= 0.005);
  }
  SUBCASE("fourth moment") {
    RngStream rng(13);
    const PointMatrix x = sample_gaussian(1, 1'000'000, rng);
    const double m4 = x.col(0).array().pow(4).mean();
    CHECK(std::abs(m4 - 3.0) <= 5 * std::sqrt(96.0 / 1e6));
  }
}

TEST_CASE("sampling is identical across thread counts and repeated calls") {
  const unsigned before = worker_threads();
  set_worker_threads(1);
  RngStream a(21);
  const PointMatrix one = sample_gaussian(3, 20'000, a);
  set_worker_threads(4);
  RngStream b(21);
  const PointMatrix four = sample_gaussian(3, 20'000, b);
  set_worker_threads(before);
  CHECK(one == four);
  CHECK(a.position() == b.position());
  RngStream c(21), d(21);
  CHECK(sample_gaussian(1, 1, c)(0, 0) == sample_gaussian(1, 1, d)(0, 0));
}

TEST_CASE("gauss-hermite small rules") {
  const QuadratureRule q1 = gauss_hermite_rule(1);
  REQUIRE(q1.size() == 1);
  CHECK(q1.nodes[0] == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(q1.weights[0] == doctest::Approx(1.0));
  const QuadratureRule q2 = gauss_hermite_rule(2);
  CHECK(std::abs(q2.nodes[0] + 1.0) <= 1e-14);
  CHECK(std::abs(q2.nodes[1] - 1.0) <= 1e-14);
  CHECK(std::abs(q2.weights[0] - 0.5) <= 1e-14);
  CHECK(std::abs(q2.weights[1] - 0.5) <= 1e-14);
  const QuadratureRule q3 = gauss_hermite_rule(3);
  CHECK(std::abs(q3.integrate([](double x) { return x * x * x * x; }) - 3.0) <= 1e-13);
}

TEST_CASE("quadrature exactness for every rule size") {
  for (int q = 1; q <= kMaxQuadratureNodes; ++q) {
    const QuadratureRule rule = gauss_hermite_rule(q);
    const double total = std::accumulate(rule.weights.begin(), rule.weights.end(), 0.0);
    REQUIRE(std::abs(total - 1.0) <= 1e-12);
    for (double w : rule.weights) REQUIRE(w > 0.0);
    for (int n = 0; n <= 2 * q - 1; ++n) {
      const double exact = oracle::normal_moment(n);
      const double got = rule.integrate([n](double x) { return std::pow(x, n); });
      // Rounding scales with sum_i w_i |x_i|^n, not with the (possibly zero) moment.
      const double scale = rule.integrate([n](double x) { return std::pow(std::abs(x), n); });
      INFO("q=" << q << " n=" << n);
      REQUIRE(std::abs(got - exact) <= 1e-12 * std::max(1.0, scale));
    }
  }
}

TEST_CASE("gauss-laguerre moments") {
  for (int q : {1, 5, 20, 64}) {
    const QuadratureRule rule = gauss_laguerre_rule(q);
    double fact = 1.0;
    for (int n = 0; n <= std::min(2 * q - 1, 30); ++n) {
      if (n > 0) fact *= n;
      const double got = rule.integrate([n](double s) { return std::pow(s, n); });
      INFO("q=" << q << " n=" << n);
      REQUIRE(std::abs(got / fact - 1.0) <= 1e-10);
    }
  }
}

TEST_CASE("rule size outside [1, 64] is a configuration error") {
  CHECK_THROWS_AS(gauss_hermite_rule(0), ConfigError);
  CHECK_THROWS_AS(gauss_hermite_rule(65), ConfigError);
  CHECK_THROWS_AS(gauss_laguerre_rule(0), ConfigError);
}

TEST_CASE("normal cdf values and symmetry") {
  CHECK(std_normal_cdf(0.0) == 0.5);
  CHECK(std::abs(std_normal_cdf(40.0) - 1.0) <= 1e-15);
  CHECK(std::abs(std_normal_cdf(1.0) - 0.8413447460685429) <= 1e-12);
  CHECK(std::abs(std_normal_cdf(-1.96) - 0.024997895148220435) <= 1e-12);
  for (double x = -8.0; x <= 8.0; x += 0.37) CHECK(std::abs(std_normal_cdf(-x) - (1.0 - std_normal_cdf(x))) <= 1e-14);
}

TEST_CASE("normal quantile inverts the cdf") {
  for (double p : {1e-12, 1e-6, 0.001, 0.025, 0.3, 0.5, 0.77, 0.975, 0.999999}) {
    const double x = std_normal_quantile(p);
    CHECK(std::abs(std_normal_cdf(x) - p) <= 1e-13 * std::max(1.0, p / 1e-3));
  }
  CHECK(std::abs(std_normal_pdf(0.0) - 1.0 / std::sqrt(2.0 * std::numbers::pi)) <= 1e-16);
}
