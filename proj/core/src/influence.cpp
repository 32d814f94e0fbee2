#include "agnostic/influence.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "agnostic/errors.hpp"

namespace agnostic {

InfluenceMatrix influence_matrix(const HermitePoly& poly) {
  const HermiteBasis& basis = poly.basis();
  const int d = basis.dimension();
  if (basis.size() == 0) throw UsageError("influence matrix of an empty polynomial");
  if (basis.degree() == 0) return {Eigen::MatrixXd::Zero(d, d)};

  // Column i holds the coefficients of d_i P on the degree-(k-1) indices,
  // which are a prefix of the degree-k ordering.
  std::size_t lower = 0;
  while (lower < basis.size() && basis.index(lower).total_degree() < basis.degree()) ++lower;
  Eigen::MatrixXd grad(static_cast<Eigen::Index>(lower), d);
  for (std::size_t r = 0; r < lower; ++r) {
    const MultiIndex& beta = basis.index(r);
    for (int i = 0; i < d; ++i) {
      grad(static_cast<Eigen::Index>(r), i) =
          std::sqrt(static_cast<double>(beta.alpha[static_cast<std::size_t>(i)] + 1)) *
          poly.coeffs()[basis.raised(r, i)];
    }
  }
  Eigen::MatrixXd m = grad.transpose() * grad;
  m = 0.5 * (m + m.transpose()).eval();
  return {std::move(m)};
}

SymmetricEigen eig_sym(const Eigen::MatrixXd& input, int max_sweeps) {
  if (input.rows() != input.cols()) throw UsageError("eig_sym needs a square matrix");
  if (!input.allFinite()) throw DataError("eig_sym: matrix has non-finite entries");
  const Eigen::Index n = input.rows();
  const double scale = std::max(input.cwiseAbs().maxCoeff(), 0.0);
  if ((input - input.transpose()).cwiseAbs().maxCoeff() > 1e-9 * std::max(scale, 1.0)) {
    throw UsageError("eig_sym needs a symmetric matrix");
  }

  Eigen::MatrixXd a = 0.5 * (input + input.transpose());
  Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);
  const double frob = a.norm();
  int sweep = 0;
  for (; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (Eigen::Index p = 0; p < n; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (std::sqrt(2.0 * off) <= 1e-15 * frob || off == 0.0) break;

    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = a(q, p) = 0.0;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index i, Eigen::Index j) { return a(i, i) > a(j, j); });

  SymmetricEigen out;
  out.values.resize(n);
  out.vectors.resize(n, n);
  out.sweeps = sweep;
  for (Eigen::Index j = 0; j < n; ++j) {
    const Eigen::Index src = order[static_cast<std::size_t>(j)];
    out.values[j] = a(src, src);
    Eigen::VectorXd col = v.col(src);
    Eigen::Index arg = 0;
    col.cwiseAbs().maxCoeff(&arg);
    if (col[arg] < 0.0) col = -col;
    out.vectors.col(j) = col;
  }
  return out;
}

Subspace select_subspace(const InfluenceMatrix& influence, double eta) {
  if (!(eta > 0.0) || !std::isfinite(eta)) {
    throw ConfigError("subspace threshold eta must be > 0, got " + std::to_string(eta));
  }
  const SymmetricEigen eig = eig_sym(influence.m);
  Eigen::Index m = 0;
  while (m < eig.values.size() && eig.values[m] >= eta) ++m;

  const double trace = influence.trace();
  if (static_cast<double>(m) * eta > trace + 1e-9 * std::max(1.0, std::abs(trace))) {
    throw std::logic_error("subspace rank " + std::to_string(m) + " violates rank * eta <= trace(M)");
  }

  Subspace out;
  out.threshold = eta;
  out.eigenvalues = eig.values.head(m);
  out.basis = eig.vectors.leftCols(m).transpose();
  return out;
}

Subspace full_space(int d) {
  Subspace out;
  out.basis = Eigen::MatrixXd::Identity(d, d);
  out.eigenvalues = Eigen::VectorXd::Ones(d);
  out.threshold = 0.0;
  return out;
}

Eigen::VectorXd project(const Eigen::VectorXd& v, const Subspace& subspace) {
  if (v.size() != subspace.dimension()) {
    throw UsageError("project: vector dimension " + std::to_string(v.size()) +
                     " does not match subspace ambient dimension " + std::to_string(subspace.dimension()));
  }
  return subspace.basis * v;
}

Eigen::VectorXd lift(const Eigen::VectorXd& coords, const Subspace& subspace) {
  if (coords.size() != subspace.rank()) {
    throw UsageError("lift: coordinate count " + std::to_string(coords.size()) +
                     " does not match subspace rank " + std::to_string(subspace.rank()));
  }
  return subspace.basis.transpose() * coords;
}

}  // namespace agnostic
