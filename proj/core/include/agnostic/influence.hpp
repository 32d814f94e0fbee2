#pragma once

#include <Eigen/Dense>

#include "agnostic/hermite.hpp"

namespace agnostic {

// M = E[grad P(x) grad P(x)^T] under N(0, I), computed from coefficients.
struct InfluenceMatrix {
  Eigen::MatrixXd m;

  int dimension() const noexcept { return static_cast<int>(m.rows()); }
  double trace() const { return m.trace(); }
};

// M_ij = sum_beta sqrt((beta_i + 1)(beta_j + 1)) c_{beta+e_i} c_{beta+e_j}.
InfluenceMatrix influence_matrix(const HermitePoly& poly);

struct SymmetricEigen {
  Eigen::VectorXd values;   // descending
  Eigen::MatrixXd vectors;  // column j pairs with values[j]; largest |entry| positive
  int sweeps = 0;
};

// Cyclic Jacobi eigendecomposition of a symmetric matrix. Throws DataError on
// non-finite entries and UsageError when the matrix is not square/symmetric.
SymmetricEigen eig_sym(const Eigen::MatrixXd& m, int max_sweeps = 100);

// Orthonormal basis (rows) of the span of eigenvectors with eigenvalue >= threshold.
struct Subspace {
  Eigen::MatrixXd basis;  // rank() x dimension()
  Eigen::VectorXd eigenvalues;
  double threshold = 0.0;

  int rank() const noexcept { return static_cast<int>(basis.rows()); }
  int dimension() const noexcept { return static_cast<int>(basis.cols()); }
};

// Keeps eigenvectors with eigenvalue >= eta; may return rank 0. Throws
// ConfigError for eta <= 0. Enforces rank * eta <= trace(M).
Subspace select_subspace(const InfluenceMatrix& influence, double eta);

// R^d itself, used by the brute-force path.
Subspace full_space(int d);

// Coordinates of v in the subspace basis.
Eigen::VectorXd project(const Eigen::VectorXd& v, const Subspace& subspace);
// Vector in R^d with the given subspace coordinates.
Eigen::VectorXd lift(const Eigen::VectorXd& coords, const Subspace& subspace);

}  // namespace agnostic
