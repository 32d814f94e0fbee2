#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "agnostic/cover.hpp"
#include "agnostic/datasets.hpp"
#include "agnostic/errors.hpp"
#include "agnostic/parallel.hpp"
#include "oracles.hpp"

using namespace agnostic;

namespace {

double max_gap(const std::vector<Eigen::VectorXd>& cover, int m, int probes, RngStream& rng) {
  double worst = 0.0;
  for (int t = 0; t < probes; ++t) {
    const Eigen::VectorXd u = oracle::random_unit(m, rng);
    double best = std::numeric_limits<double>::infinity();
    for (const auto& c : cover) best = std::min(best, (c - u).norm());
    worst = std::max(worst, best);
  }
  return worst;
}

SampleBatch planted(int d, std::size_t n, const char* noise, std::uint64_t seed, PlantedModel* out = nullptr) {
  RngStream rng(seed);
  const PlantedModel m = make_planted(LabelMode::halfspace, d, NoiseSpec::parse(noise), rng);
  if (out) *out = m;
  return generate(m, n, rng).batch;
}

}  // namespace

TEST_CASE("sphere covers") {
  RngStream rng(1);
  const auto c1 = unit_ball_cover(1, 0.5);
  CHECK(c1.size() == 2);
  CHECK(max_gap(c1, 1, 10'000, rng) <= 0.5);
  const auto c2 = unit_ball_cover(2, 0.3);
  CHECK(max_gap(c2, 2, 100'000, rng) <= 0.3);
  const auto c3 = unit_ball_cover(3, 0.2);
  CHECK(static_cast<double>(c3.size()) <= std::pow(cover_size_constant(3) / 0.2, 3));
  CHECK(max_gap(c3, 3, 20'000, rng) <= 0.2);
  for (int m = 1; m <= 4; ++m) {
    for (double eps : {0.9, 0.5, 0.35}) {
      const auto c = unit_ball_cover(m, eps);
      CHECK(static_cast<double>(c.size()) <= std::pow(cover_size_constant(m) / eps, m));
      for (const auto& v : c) CHECK(std::abs(v.norm() - 1.0) <= 1e-12);
      CHECK(max_gap(c, m, 5000, rng) <= eps);
    }
  }
  CHECK_THROWS_AS(unit_ball_cover(6, 0.01), ResourceError);
  CHECK_THROWS_AS(unit_ball_cover(3, 0.2, 50), ResourceError);
}

TEST_CASE("threshold grids") {
  const auto half = threshold_grid(0.5);
  CHECK(half == std::vector<double>{-0.5, 0.0, 0.5});
  const auto tenth = threshold_grid(0.1);
  CHECK(std::abs(tenth.back() - 1.5) <= 1e-12);
  CHECK(std::abs(tenth.front() + 1.5) <= 1e-12);
  for (std::size_t i = 1; i < tenth.size(); ++i) CHECK(std::abs(tenth[i] - tenth[i - 1] - 0.1) <= 1e-12);
  CHECK(std::count(tenth.begin(), tenth.end(), 0.0) == 1);
  CHECK_THROWS_AS(threshold_grid(1.0), ConfigError);
}

TEST_CASE("grid construction") {
  Subspace empty;
  empty.basis.resize(0, 4);
  const HypothesisGrid g0 = build_grid(empty, 0.3);
  CHECK(g0.size() == 2);
  CHECK(g0.candidate(0).constant == 1);
  CHECK(g0.candidate(1).constant == -1);

  Subspace line;
  line.basis = Eigen::RowVector3d(0, 1, 0);
  const HypothesisGrid g1 = build_grid(line, 0.5);
  CHECK(g1.size() == 8);

  RngStream rng(2);
  const HermitePoly p = oracle::random_poly(5, 2, rng);
  const Subspace v = select_subspace(influence_matrix(p), 0.3);
  REQUIRE(v.rank() >= 1);
  const HypothesisGrid g = build_grid(v, 0.4);
  CHECK(g.size() == g.directions.size() * g.thresholds.size() + 2);
  for (std::size_t i = 0; i < g.halfspace_count(); ++i) {
    const HalfspaceHypothesis h = g.candidate(i);
    CHECK(std::abs(h.w.norm() - 1.0) <= 1e-10);
    CHECK((h.w - lift(project(h.w, v), v)).norm() <= 1e-10);
  }
  CHECK_THROWS_AS(g.candidate(g.size()), UsageError);
}

TEST_CASE("candidate mistakes equal a direct count") {
  const SampleBatch b = planted(3, 3000, "rcn:0.2", 3);
  const HypothesisGrid g = build_grid(full_space(3), 0.45);
  const auto counts = candidate_mistakes(g, b);
  REQUIRE(counts.size() == g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double direct = zero_one_error(g.candidate(i), b) * static_cast<double>(b.size());
    REQUIRE(counts[i] == static_cast<std::uint64_t>(std::llround(direct)));
  }
}

TEST_CASE("selection") {
  SUBCASE("labels produced by a grid candidate") {
    const HypothesisGrid g = build_grid(full_space(2), 0.3);
    RngStream rng(4);
    SampleBatch b;
    b.x = sample_gaussian(2, 2000, rng);
    const HalfspaceHypothesis target = g.candidate(17);
    b.y.resize(2000);
    for (std::size_t i = 0; i < 2000; ++i) b.y[static_cast<Eigen::Index>(i)] = target.predict(b.point(i));
    const Selection s = select_best(g, b);
    CHECK(s.error == 0.0);
  }
  SUBCASE("all positive labels pick constant +1") {
    const HypothesisGrid g = build_grid(full_space(2), 0.3);
    SampleBatch b = planted(2, 500, "clean", 5);
    b.y.setOnes();
    const Selection s = select_best(g, b);
    CHECK(s.error == 0.0);
  }
  SUBCASE("planted direction is found") {
    RngStream rng(6);
    SampleBatch b;
    b.x = sample_gaussian(2, 50'000, rng);
    b.y = b.x.col(0).unaryExpr([](double v) { return v >= 0.0 ? 1.0 : -1.0; });
    const Selection s = select_best(build_grid(full_space(2), 0.2), b);
    CHECK(s.error <= 0.1);
  }
  SUBCASE("ties prefer the smaller threshold, then grid order") {
    HypothesisGrid g;
    g.dimension = 1;
    g.eps = 0.5;
    g.directions = {Eigen::VectorXd::Ones(1)};
    g.thresholds = {-0.5, 0.0, 0.5};
    SampleBatch b;
    b.x = PointMatrix(2, 1);
    b.x << 2.0, -2.0;
    b.y = Eigen::Vector2d(1.0, -1.0);
    const Selection s = select_best(g, b);
    CHECK(s.index == 1);
    CHECK(s.hypothesis.t == 0.0);
  }
}

TEST_CASE("selection is independent of the thread count") {
  const SampleBatch b = planted(3, 20'000, "rcn:0.1", 7);
  const HypothesisGrid g = build_grid(full_space(3), 0.3);
  const unsigned before = worker_threads();
  set_worker_threads(1);
  const Selection a = select_best(g, b);
  set_worker_threads(4);
  const Selection c = select_best(g, b);
  set_worker_threads(before);
  CHECK(a.index == c.index);
  CHECK(a.error == c.error);
}

TEST_CASE("holdout-sized selection is close to its population error") {
  // Population error of sign(w.x + t) against a planted homogeneous halfspace
  // under rcn(r): r + (1 - 2r) P[disagree], with P[disagree] from a large
  // reference sample.
  const double eps = 0.2;
  const double delta = 0.1;
  const HypothesisGrid g = build_grid(full_space(2), eps);
  const auto n_holdout = static_cast<std::size_t>(std::ceil(4.0 * std::log(g.size() / delta) / (eps * eps)));
  int good = 0;
  const int runs = 20;
  for (int seed = 0; seed < runs; ++seed) {
    PlantedModel m;
    const SampleBatch holdout = planted(2, n_holdout, "rcn:0.1", 100 + static_cast<std::uint64_t>(seed), &m);
    const Selection s = select_best(g, holdout);
    RngStream ref(900 + static_cast<std::uint64_t>(seed));
    const PointMatrix x = sample_gaussian(2, 200'000, ref);
    std::size_t disagree = 0;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      std::span<const double> row(x.row(i).data(), 2);
      const int planted_label = dot({m.w_star.data(), 2}, row) >= 0.0 ? 1 : -1;
      disagree += s.hypothesis.predict(row) != planted_label;
    }
    const double population = 0.1 + 0.8 * static_cast<double>(disagree) / 200'000.0;
    good += std::abs(population - s.error) <= eps;
  }
  CHECK(good >= 19);
}
