#include "agnostic/cover.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <string>

#include "agnostic/errors.hpp"
#include "agnostic/parallel.hpp"

namespace agnostic {
namespace {

struct LatticeWalk {
  int m;
  double spacing;
  double inner_sq;  // shell bounds in lattice units, squared
  double outer_sq;
  int radius;
  std::size_t cap;
  std::vector<int> z;
  std::set<std::vector<long long>> seen;
  std::vector<Eigen::VectorXd> out;

  void visit(int pos, double partial_sq) {
    if (pos == m) {
      if (partial_sq < inner_sq || partial_sq > outer_sq) return;
      Eigen::VectorXd v(m);
      for (int i = 0; i < m; ++i) v[i] = z[static_cast<std::size_t>(i)];
      v /= v.norm();
      std::vector<long long> key(static_cast<std::size_t>(m));
      for (int i = 0; i < m; ++i) key[static_cast<std::size_t>(i)] = std::llround(v[i] * 1e9);
      if (!seen.insert(std::move(key)).second) return;
      if (out.size() >= cap) {
        throw ResourceError("unit-sphere cover for m=" + std::to_string(m) +
                            " exceeds the enumeration cap " + std::to_string(cap));
      }
      out.push_back(std::move(v));
      return;
    }
    for (int c = -radius; c <= radius; ++c) {
      const double next = partial_sq + static_cast<double>(c) * c;
      if (next > outer_sq) continue;
      z[static_cast<std::size_t>(pos)] = c;
      visit(pos + 1, next);
    }
  }
};

// Sorted margins with prefix counts of positive labels.
struct SortedMargins {
  std::vector<double> z;
  std::vector<std::uint64_t> pos_below;  // pos_below[i] = positives among z[0..i)
  std::uint64_t total_pos = 0;

  SortedMargins(const Eigen::VectorXd& w, const SampleBatch& batch) {
    const Eigen::VectorXd raw = margins(w, batch.x);
    const std::size_t n = batch.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return raw[static_cast<Eigen::Index>(a)] < raw[static_cast<Eigen::Index>(b)];
    });
    z.resize(n);
    pos_below.resize(n + 1);
    pos_below[0] = 0;
    for (std::size_t i = 0; i < n; ++i) {
      z[i] = raw[static_cast<Eigen::Index>(order[i])];
      pos_below[i + 1] = pos_below[i] + (batch.y[static_cast<Eigen::Index>(order[i])] > 0.0 ? 1 : 0);
    }
    total_pos = pos_below[n];
  }

  // Mistakes of sign(w.x + t): predicted +1 iff z >= -t.
  std::uint64_t mistakes(double t) const {
    const auto below = static_cast<std::size_t>(std::lower_bound(z.begin(), z.end(), -t) - z.begin());
    const std::uint64_t neg_total = z.size() - total_pos;
    const std::uint64_t neg_below = below - pos_below[below];
    return pos_below[below] + (neg_total - neg_below);
  }
};

}  // namespace

HalfspaceHypothesis HalfspaceHypothesis::constant_label(int sign, int d) {
  return HalfspaceHypothesis{Eigen::VectorXd::Zero(d), 0.0, sign >= 0 ? 1 : -1};
}

double zero_one_error(const HalfspaceHypothesis& h, const SampleBatch& batch) {
  if (batch.empty()) throw UsageError("0-1 error of an empty batch");
  if (!h.is_constant() && h.w.size() != batch.dimension()) {
    throw UsageError("hypothesis dimension does not match batch dimension");
  }
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const int label = batch.y[static_cast<Eigen::Index>(i)] > 0.0 ? 1 : -1;
    if (h.predict(batch.point(i)) != label) ++wrong;
  }
  return static_cast<double>(wrong) / static_cast<double>(batch.size());
}

double cover_size_constant(int m) { return 3.0 * (std::sqrt(static_cast<double>(m)) + 1.0); }

std::vector<Eigen::VectorXd> unit_ball_cover(int m, double eps, std::size_t cap) {
  if (m < 1) throw UsageError("cover dimension must be >= 1");
  if (!(eps > 0.0 && eps <= 1.0)) throw ConfigError("cover radius must be in (0, 1], got " + std::to_string(eps));
  const double estimate = std::pow(1.0 / eps, m);
  if (estimate > static_cast<double>(cap)) {
    throw ResourceError("eps-cover of the unit sphere in R^" + std::to_string(m) + " at eps=" +
                        std::to_string(eps) + " needs about " + std::to_string(estimate) +
                        " points, above the enumeration cap " + std::to_string(cap));
  }
  const double spacing = eps / std::sqrt(static_cast<double>(m));
  const double inner = std::max(0.0, (1.0 - eps / 2.0) / spacing);
  const double outer = (1.0 + eps / 2.0) / spacing;
  LatticeWalk walk{m,
                   spacing,
                   inner * inner,
                   outer * outer,
                   static_cast<int>(std::ceil(outer)),
                   cap,
                   std::vector<int>(static_cast<std::size_t>(m), 0),
                   {},
                   {}};
  walk.visit(0, 0.0);
  return std::move(walk.out);
}

std::vector<double> threshold_grid(double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw ConfigError("threshold grid needs 0 < eps < 1, got " + std::to_string(eps));
  const double extent = std::sqrt(std::log(1.0 / eps));
  const auto steps = static_cast<long>(std::floor(extent / eps + 1e-9));
  std::vector<double> grid;
  grid.reserve(static_cast<std::size_t>(2 * steps + 1));
  for (long j = -steps; j <= steps; ++j) grid.push_back(static_cast<double>(j) * eps);
  return grid;
}

HalfspaceHypothesis HypothesisGrid::candidate(std::size_t index) const {
  const std::size_t halfspaces = halfspace_count();
  if (index == halfspaces) return HalfspaceHypothesis::constant_label(+1, dimension);
  if (index == halfspaces + 1) return HalfspaceHypothesis::constant_label(-1, dimension);
  if (index > halfspaces + 1) throw UsageError("grid candidate index out of range");
  return HalfspaceHypothesis{directions[index / thresholds.size()], thresholds[index % thresholds.size()], 0};
}

HypothesisGrid build_grid(const Subspace& subspace, double eps, std::size_t cap) {
  HypothesisGrid grid;
  grid.dimension = subspace.dimension();
  grid.subspace_rank = subspace.rank();
  grid.eps = eps;
  grid.thresholds = threshold_grid(eps);
  if (subspace.rank() > 0) {
    for (const Eigen::VectorXd& c : unit_ball_cover(subspace.rank(), eps, cap)) {
      Eigen::VectorXd w = lift(c, subspace);
      grid.directions.push_back(w / w.norm());
    }
  }
  if (grid.size() > cap) {
    throw ResourceError("hypothesis grid has " + std::to_string(grid.size()) +
                        " candidates, above the enumeration cap " + std::to_string(cap));
  }
  return grid;
}

std::vector<std::uint64_t> candidate_mistakes(const HypothesisGrid& grid, const SampleBatch& batch) {
  if (batch.empty()) throw UsageError("candidate selection needs a non-empty holdout");
  if (batch.dimension() != grid.dimension) throw UsageError("holdout dimension does not match the grid");
  const std::size_t n_thr = grid.thresholds.size();
  std::vector<std::uint64_t> counts(grid.size(), 0);
  parallel_for(grid.directions.size(), [&](std::size_t dir) {
    const SortedMargins sorted(grid.directions[dir], batch);
    for (std::size_t j = 0; j < n_thr; ++j) counts[dir * n_thr + j] = sorted.mistakes(grid.thresholds[j]);
  });
  std::uint64_t positives = 0;
  for (Eigen::Index i = 0; i < batch.y.size(); ++i) positives += batch.y[i] > 0.0 ? 1 : 0;
  counts[grid.halfspace_count()] = batch.size() - positives;
  counts[grid.halfspace_count() + 1] = positives;
  return counts;
}

Selection select_best(const HypothesisGrid& grid, const SampleBatch& holdout) {
  const std::vector<std::uint64_t> counts = candidate_mistakes(grid, holdout);
  if (counts.empty()) throw std::logic_error("empty hypothesis grid");
  const std::size_t n_thr = grid.thresholds.size();
  const std::size_t halfspaces = grid.halfspace_count();
  auto abs_t = [&](std::size_t i) {
    return i < halfspaces ? std::abs(grid.thresholds[i % n_thr]) : std::numeric_limits<double>::infinity();
  };
  std::size_t best = 0;
  for (std::size_t i = 1; i < counts.size(); ++i) {
    if (counts[i] < counts[best] || (counts[i] == counts[best] && abs_t(i) < abs_t(best))) best = i;
  }
  return Selection{grid.candidate(best),
                   static_cast<double>(counts[best]) / static_cast<double>(holdout.size()), best};
}

}  // namespace agnostic
