#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "agnostic/influence.hpp"
#include "agnostic/sample.hpp"

namespace agnostic {

inline constexpr std::size_t kDefaultEnumerationCap = 10'000'000;

// sign(w . x + t), with sign(0) = +1. A nonzero `constant` replaces the
// halfspace by the constant label +1 or -1.
struct HalfspaceHypothesis {
  Eigen::VectorXd w;
  double t = 0.0;
  int constant = 0;

  static HalfspaceHypothesis constant_label(int sign, int d);

  bool is_constant() const noexcept { return constant != 0; }
  int predict(std::span<const double> x) const noexcept {
    if (constant != 0) return constant;
    return dot({w.data(), static_cast<std::size_t>(w.size())}, x) >= -t ? 1 : -1;
  }
};

// Fraction of points whose label differs from the prediction.
double zero_one_error(const HalfspaceHypothesis& h, const SampleBatch& batch);

// Constant A(m) = 3 (sqrt(m) + 1) with |unit_ball_cover(m, eps)| <= (A / eps)^m
// for eps <= 1.
double cover_size_constant(int m);

// eps-cover of the unit sphere in R^m: lattice points of spacing eps/sqrt(m)
// whose norm is within eps/2 of 1, normalized and deduplicated. Every unit
// vector is within eps of some member. Throws ResourceError when (1/eps)^m or
// the produced size exceeds `cap`.
std::vector<Eigen::VectorXd> unit_ball_cover(int m, double eps, std::size_t cap = kDefaultEnumerationCap);

// {j * eps : |j * eps| <= sqrt(ln(1/eps))}, ascending, always containing 0.
std::vector<double> threshold_grid(double eps);

// Candidates: every lifted cover direction paired with every threshold, in
// direction-major order, followed by the constants +1 and -1.
struct HypothesisGrid {
  int dimension = 0;
  int subspace_rank = 0;
  double eps = 0.0;
  std::vector<Eigen::VectorXd> directions;
  std::vector<double> thresholds;

  std::size_t halfspace_count() const noexcept { return directions.size() * thresholds.size(); }
  std::size_t size() const noexcept { return halfspace_count() + 2; }
  HalfspaceHypothesis candidate(std::size_t index) const;
};

HypothesisGrid build_grid(const Subspace& subspace, double eps, std::size_t cap = kDefaultEnumerationCap);

// Misclassification counts of every grid candidate on `batch`, in grid order.
std::vector<std::uint64_t> candidate_mistakes(const HypothesisGrid& grid, const SampleBatch& batch);

struct Selection {
  HalfspaceHypothesis hypothesis;
  double error = 0.0;
  std::size_t index = 0;
};

// Empirical 0-1 minimizer; ties go to the smaller |t| (constants last), then
// to the earlier candidate.
Selection select_best(const HypothesisGrid& grid, const SampleBatch& holdout);

}  // namespace agnostic
