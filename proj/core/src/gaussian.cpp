#include "agnostic/gaussian.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <numeric>
#include <utility>

#include "agnostic/errors.hpp"
#include "agnostic/parallel.hpp"

namespace agnostic {
namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                           std::array<std::uint32_t, 2> key) noexcept {
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = std::uint64_t{kPhiloxM0} * ctr[0];
    const std::uint64_t p1 = std::uint64_t{kPhiloxM1} * ctr[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kPhiloxW0;
    key[1] += kPhiloxW1;
  }
  return ctr;
}

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// (H_q(x), H_{q-1}(x)) for the normalized Hermite polynomials.
std::pair<double, double> hermite_pair(int q, double x) {
  double h_prev = 0.0;
  double h = 1.0;
  for (int n = 0; n < q; ++n) {
    const double next = (x * h - std::sqrt(static_cast<double>(n)) * h_prev) /
                        std::sqrt(static_cast<double>(n + 1));
    h_prev = h;
    h = next;
  }
  return {h, h_prev};
}

// Newton polish of a root of H_q. Returns H_{q-1} at the polished root.
double polish_hermite_root(int q, double& x) {
  for (int iter = 0; iter < 20; ++iter) {
    const auto [h, h_prev] = hermite_pair(q, x);
    // H_q' = sqrt(q) H_{q-1}
    const double step = h / (std::sqrt(static_cast<double>(q)) * h_prev);
    x -= step;
    if (std::abs(step) <= 1e-15 * std::max(1.0, std::abs(x))) break;
  }
  return hermite_pair(q, x).second;
}

// Newton polish of a root of the Laguerre polynomial L_q; returns L_{q+1}.
double polish_laguerre_root(int q, double& x) {
  auto eval = [q](double s, double& lq, double& lq_minus) {
    double l_prev = 0.0;
    double l = 1.0;
    for (int n = 0; n < q; ++n) {
      const double next = ((2.0 * n + 1.0 - s) * l - n * l_prev) / (n + 1.0);
      l_prev = l;
      l = next;
    }
    lq = l;
    lq_minus = l_prev;
  };
  for (int iter = 0; iter < 20; ++iter) {
    double lq = 0.0;
    double lm = 0.0;
    eval(x, lq, lm);
    const double deriv = q * (lq - lm) / x;
    const double step = lq / deriv;
    x -= step;
    if (std::abs(step) <= 1e-15 * std::max(1.0, std::abs(x))) break;
  }
  double lq = 0.0;
  double lm = 0.0;
  eval(x, lq, lm);
  return ((2.0 * q + 1.0 - x) * lq - q * lm) / (q + 1.0);
}

void check_node_count(int q) {
  if (q < 1 || q > kMaxQuadratureNodes) {
    throw ConfigError("quadrature node count must be in [1, " +
                      std::to_string(kMaxQuadratureNodes) + "], got " + std::to_string(q));
  }
}

// Eigenvalues of the symmetric tridiagonal Jacobi (companion) matrix.
Eigen::VectorXd tridiagonal_eigenvalues(const Eigen::VectorXd& diag, const Eigen::VectorXd& off) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, off, Eigen::EigenvaluesOnly);
  return solver.eigenvalues();
}

}  // namespace

RngStream RngStream::substream(std::uint64_t id) const noexcept {
  const std::uint64_t derived = splitmix64(stream_id_ ^ splitmix64(id + 0x632BE59BD9B4E019ull));
  return RngStream(seed_, derived);
}

std::uint64_t RngStream::u64_at(std::uint64_t index) const noexcept {
  const std::uint64_t block = index >> 1;
  const auto out = philox4x32_10(
      {static_cast<std::uint32_t>(block), static_cast<std::uint32_t>(block >> 32),
       static_cast<std::uint32_t>(stream_id_), static_cast<std::uint32_t>(stream_id_ >> 32)},
      {static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32)});
  if ((index & 1u) == 0) return std::uint64_t{out[0]} | (std::uint64_t{out[1]} << 32);
  return std::uint64_t{out[2]} | (std::uint64_t{out[3]} << 32);
}

double RngStream::uniform_at(std::uint64_t index) const noexcept {
  return (static_cast<double>(u64_at(index) >> 11) + 0.5) * 0x1.0p-53;
}

double RngStream::normal_at(std::uint64_t index) const noexcept {
  return std_normal_quantile(uniform_at(index));
}

void fill_gaussian(std::span<double> out, RngStream& rng) {
  const std::uint64_t start = rng.position();
  const std::size_t n = out.size();
  parallel_for(block_count(n), [&](std::size_t b) {
    const std::size_t lo = b * kSampleBlock;
    const std::size_t hi = std::min(n, lo + kSampleBlock);
    for (std::size_t i = lo; i < hi; ++i) out[i] = rng.normal_at(start + i);
  });
  rng.skip(n);
}

PointMatrix sample_gaussian(int d, std::size_t n, RngStream& rng) {
  PointMatrix x(static_cast<Eigen::Index>(n), d);
  fill_gaussian(std::span<double>(x.data(), static_cast<std::size_t>(x.size())), rng);
  return x;
}

QuadratureRule gauss_hermite_rule(int q) {
  check_node_count(q);
  QuadratureRule rule;
  if (q == 1) {
    rule.nodes = {0.0};
    rule.weights = {1.0};
    return rule;
  }
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(q);
  Eigen::VectorXd off(q - 1);
  for (int i = 0; i < q - 1; ++i) off[i] = std::sqrt(static_cast<double>(i + 1));
  const Eigen::VectorXd guesses = tridiagonal_eigenvalues(diag, off);

  rule.nodes.resize(q);
  rule.weights.resize(q);
  for (int i = 0; i < q; ++i) {
    double x = guesses[i];
    const double h_prev = polish_hermite_root(q, x);
    rule.nodes[i] = x;
    rule.weights[i] = 1.0 / (q * h_prev * h_prev);
  }
  // Symmetrize so odd moments vanish to rounding.
  for (int i = 0; i < q / 2; ++i) {
    const int j = q - 1 - i;
    const double node = 0.5 * (rule.nodes[j] - rule.nodes[i]);
    const double weight = 0.5 * (rule.weights[i] + rule.weights[j]);
    rule.nodes[i] = -node;
    rule.nodes[j] = node;
    rule.weights[i] = rule.weights[j] = weight;
  }
  if (q % 2 == 1) rule.nodes[q / 2] = 0.0;
  const double total = std::accumulate(rule.weights.begin(), rule.weights.end(), 0.0);
  for (double& w : rule.weights) w /= total;
  return rule;
}

QuadratureRule gauss_laguerre_rule(int q) {
  check_node_count(q);
  Eigen::VectorXd diag(q);
  Eigen::VectorXd off(std::max(q - 1, 0));
  for (int i = 0; i < q; ++i) diag[i] = 2.0 * i + 1.0;
  for (int i = 0; i + 1 < q; ++i) off[i] = i + 1.0;
  const Eigen::VectorXd guesses =
      q == 1 ? Eigen::VectorXd::Ones(1) : tridiagonal_eigenvalues(diag, off);

  QuadratureRule rule;
  rule.nodes.resize(q);
  rule.weights.resize(q);
  for (int i = 0; i < q; ++i) {
    double x = guesses[i];
    const double l_next = polish_laguerre_root(q, x);
    rule.nodes[i] = x;
    rule.weights[i] = x / ((q + 1.0) * (q + 1.0) * l_next * l_next);
  }
  const double total = std::accumulate(rule.weights.begin(), rule.weights.end(), 0.0);
  for (double& w : rule.weights) w /= total;
  return rule;
}

double std_normal_pdf(double x) noexcept {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

double std_normal_cdf(double x) noexcept { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double std_normal_quantile(double p) noexcept {
  // Acklam's rational approximation followed by one Halley step.
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;

  if (p <= 0.0) return -std::numeric_limits<double>::infinity();
  if (p >= 1.0) return std::numeric_limits<double>::infinity();

  double x;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double e = std_normal_cdf(x) - p;
  const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
  return x - u / (1.0 + 0.5 * x * u);
}

}  // namespace agnostic
