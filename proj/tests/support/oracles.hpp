#pragma once

// Independent reference computations used by the tests. Nothing here calls
// the code under test except the 1-D Gauss-Hermite rule, whose exactness is
// checked on its own against analytic moments.

#include <cmath>
#include <cstddef>
#include <numbers>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <Eigen/Dense>

#include "agnostic/gaussian.hpp"
#include "agnostic/hermite.hpp"
#include "agnostic/sample.hpp"

namespace oracle {

using Big = boost::multiprecision::number<boost::multiprecision::cpp_bin_float<200>>;

// He_n(x) / sqrt(n!) from the explicit sum
// He_n(x) = n! sum_m (-1)^m x^(n-2m) / (m! (n-2m)! 2^m), in 200-bit floats.
inline double hermite_reference(int n, double x) {
  const Big bx(x);
  Big fact_n = 1;
  for (int i = 2; i <= n; ++i) fact_n *= i;
  Big sum = 0;
  for (int m = 0; 2 * m <= n; ++m) {
    Big denom = 1;
    for (int i = 2; i <= m; ++i) denom *= i;
    for (int i = 2; i <= n - 2 * m; ++i) denom *= i;
    denom *= boost::multiprecision::pow(Big(2), m);
    Big term = boost::multiprecision::pow(bx, n - 2 * m) / denom;
    sum += (m % 2 == 0) ? term : Big(-term);
  }
  return static_cast<double>(sum * boost::multiprecision::sqrt(fact_n));
}

// (n - 1)!! for even n, 0 for odd n.
inline double normal_moment(int n) {
  if (n % 2 == 1) return 0.0;
  double out = 1.0;
  for (int i = n - 1; i > 1; i -= 2) out *= i;
  return out;
}

// Hermite coefficients of max(0, x): c0 = 1/sqrt(2 pi), c1 = 1/2 and
// c_n = He_{n-2}(0) phi(0) / sqrt(n!) for n >= 2.
inline double relu_coefficient(int n) {
  const double phi0 = 1.0 / std::sqrt(2.0 * std::numbers::pi);
  if (n == 0) return phi0;
  if (n == 1) return 0.5;
  const int m = n - 2;
  if (m % 2 == 1) return 0.0;
  double he = (m / 2) % 2 == 0 ? 1.0 : -1.0;  // He_m(0) = (-1)^(m/2) (m-1)!!
  for (int i = m - 1; i > 1; i -= 2) he *= i;
  double fact = 1.0;
  for (int i = 2; i <= n; ++i) fact *= i;
  return he * phi0 / std::sqrt(fact);
}

struct TensorRule {
  agnostic::PointMatrix nodes;
  std::vector<double> weights;
};

inline TensorRule tensor_rule(int d, int q) {
  const agnostic::QuadratureRule rule = agnostic::gauss_hermite_rule(q);
  TensorRule out;
  std::size_t total = 1;
  for (int i = 0; i < d; ++i) total *= static_cast<std::size_t>(q);
  out.nodes.resize(static_cast<Eigen::Index>(total), d);
  out.weights.assign(total, 1.0);
  for (std::size_t p = 0; p < total; ++p) {
    std::size_t rest = p;
    for (int i = 0; i < d; ++i) {
      const std::size_t j = rest % static_cast<std::size_t>(q);
      rest /= static_cast<std::size_t>(q);
      out.nodes(static_cast<Eigen::Index>(p), i) = rule.nodes[j];
      out.weights[p] *= rule.weights[j];
    }
  }
  return out;
}

// Partial derivative by the five-point stencil, exact (up to rounding) for
// polynomials of degree <= 4.
template <class F>
double stencil_derivative(F&& f, std::vector<double> x, int coord, double h = 1e-2) {
  auto at = [&](double shift) {
    std::vector<double> y = x;
    y[static_cast<std::size_t>(coord)] += shift;
    return f(y);
  };
  return (-at(2 * h) + 8 * at(h) - 8 * at(-h) + at(-2 * h)) / (12 * h);
}

// E[d_i P d_j P] by tensor quadrature of stencil derivatives (degree <= 4).
inline Eigen::MatrixXd quadrature_influence(const agnostic::HermitePoly& p, int q = 8) {
  const int d = p.dimension();
  const TensorRule rule = tensor_rule(d, q);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(d, d);
  for (Eigen::Index r = 0; r < rule.nodes.rows(); ++r) {
    std::vector<double> x(rule.nodes.row(r).data(), rule.nodes.row(r).data() + d);
    Eigen::VectorXd g(d);
    for (int i = 0; i < d; ++i) g[i] = stencil_derivative([&](const std::vector<double>& y) { return p(y); }, x, i);
    m += rule.weights[static_cast<std::size_t>(r)] * g * g.transpose();
  }
  return m;
}

inline agnostic::HermitePoly random_poly(int d, int k, agnostic::RngStream& rng) {
  auto basis = std::make_shared<const agnostic::HermiteBasis>(d, k);
  Eigen::VectorXd c(static_cast<Eigen::Index>(basis->size()));
  for (Eigen::Index i = 0; i < c.size(); ++i) c[i] = rng.normal();
  return agnostic::HermitePoly(basis, c / c.norm());
}

inline Eigen::VectorXd random_unit(int d, agnostic::RngStream& rng) {
  Eigen::VectorXd v(d);
  for (int i = 0; i < d; ++i) v[i] = rng.normal();
  return v / v.norm();
}

// Binomial standard error of a proportion.
inline double binomial_sd(double p, double n) { return std::sqrt(p * (1.0 - p) / n); }

}  // namespace oracle
