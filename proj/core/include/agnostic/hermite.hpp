#pragma once

#include <compare>
#include <cstddef>
#include <map>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "agnostic/gaussian.hpp"

namespace agnostic {

// Default cap on binomial(d + k, k), the number of Hermite features.
inline constexpr std::size_t kDefaultFeatureCap = 200'000;

struct MultiIndex {
  std::vector<int> alpha;

  int dimension() const noexcept { return static_cast<int>(alpha.size()); }
  int total_degree() const noexcept;

  auto operator<=>(const MultiIndex&) const = default;
};

// binomial(d + k, k) computed in floating point (may exceed size_t range).
double feature_count(int d, int k);

// All multi-indices with |alpha| <= k in graded-lexicographic order: by total
// degree, then with larger leading exponents first. Throws ResourceError when
// binomial(d + k, k) exceeds `feature_cap`.
std::vector<MultiIndex> enumerate_indices(int d, int k, std::size_t feature_cap = kDefaultFeatureCap);

// Normalized probabilists' Hermite polynomial H_n = He_n / sqrt(n!).
double eval_hermite_1d(int n, double x);

// out[p] = H_p(x) for p = 0..out.size()-1.
void hermite_table(double x, std::span<double> out);

// Degree-<=k Hermite basis in d variables with its graded-lex ordering fixed.
// Shared by every polynomial living on it.
class HermiteBasis {
 public:
  HermiteBasis(int d, int k, std::size_t feature_cap = kDefaultFeatureCap);

  int dimension() const noexcept { return d_; }
  int degree() const noexcept { return k_; }
  std::size_t size() const noexcept { return indices_.size(); }

  const MultiIndex& index(std::size_t rank) const { return indices_[rank]; }
  const std::vector<MultiIndex>& indices() const noexcept { return indices_; }

  // Rank of alpha, or -1 if it is not part of the basis.
  std::ptrdiff_t rank_of(const MultiIndex& alpha) const;

  // Rank of alpha(rank) + e_coord, or -1 when that exceeds the degree bound.
  std::ptrdiff_t raised(std::size_t rank, int coord) const {
    return raised_[rank * static_cast<std::size_t>(d_) + static_cast<std::size_t>(coord)];
  }

  // Feature vector H_alpha(x) for every alpha, for one point.
  void features(std::span<const double> x, std::span<double> out) const;

  // Rows [first, first + count) of the n x size() feature matrix.
  PointMatrix feature_block(const PointMatrix& points, std::size_t first, std::size_t count) const;

 private:
  int d_;
  int k_;
  std::vector<MultiIndex> indices_;
  std::map<std::vector<int>, std::size_t> ranks_;
  std::vector<std::ptrdiff_t> raised_;
  // Sparse support per index: (coord, exponent) pairs, CSR layout.
  std::vector<std::size_t> support_offset_;
  std::vector<int> support_coord_;
  std::vector<int> support_power_;
};

// P(x) = sum_alpha c_alpha H_alpha(x), coefficients dense in the basis order.
class HermitePoly {
 public:
  explicit HermitePoly(std::shared_ptr<const HermiteBasis> basis);
  HermitePoly(std::shared_ptr<const HermiteBasis> basis, Eigen::VectorXd coeffs);

  const HermiteBasis& basis() const noexcept { return *basis_; }
  const std::shared_ptr<const HermiteBasis>& basis_ptr() const noexcept { return basis_; }
  int dimension() const noexcept { return basis_->dimension(); }
  int degree_bound() const noexcept { return basis_->degree(); }

  const Eigen::VectorXd& coeffs() const noexcept { return coeffs_; }
  Eigen::VectorXd& coeffs() noexcept { return coeffs_; }

  double coeff(const MultiIndex& alpha) const;
  void set_coeff(const MultiIndex& alpha, double value);

  // Throws UsageError on dimension mismatch.
  double operator()(std::span<const double> x) const;
  Eigen::VectorXd evaluate(const PointMatrix& points) const;

 private:
  std::shared_ptr<const HermiteBasis> basis_;
  Eigen::VectorXd coeffs_;
};

// Coefficients of dP/dx_coord (0-based) on the degree-(k-1) basis:
// (d_i P)_beta = sqrt(beta_i + 1) c_{beta + e_i}.
HermitePoly gradient_coeffs(const HermitePoly& poly, int coord);

// sum_alpha c_alpha^2 = E[P(x)^2] under N(0, I).
double parseval_norm_sq(const HermitePoly& poly);

// sum_alpha |alpha| c_alpha^2 = E[|grad P(x)|^2] under N(0, I).
double influence_trace(const HermitePoly& poly);

}  // namespace agnostic
