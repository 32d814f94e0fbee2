#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace agnostic {

// Row-major n x d matrix; row i is the i-th point.
using PointMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Counter-based random stream (Philox4x32-10 keyed by the seed, with the
// stream id in the upper counter words). Any draw can be computed directly
// from its position, so blocks of a stream can be filled in parallel and a
// given (seed, stream_id) always yields the same sequence.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, std::uint64_t stream_id = 0) noexcept
      : seed_(seed), stream_id_(stream_id) {}

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }
  std::uint64_t position() const noexcept { return position_; }

  // Independent stream derived from this one's (seed, stream_id) and `id`.
  // Does not depend on the current position.
  RngStream substream(std::uint64_t id) const noexcept;

  std::uint64_t next_u64() noexcept { return u64_at(position_++); }
  double uniform() noexcept { return uniform_at(position_++); }
  double normal() noexcept { return normal_at(position_++); }
  void skip(std::uint64_t count) noexcept { position_ += count; }

  // Random access relative to the stream start; does not advance.
  std::uint64_t u64_at(std::uint64_t index) const noexcept;
  // Uniform on the open interval (0, 1), 53-bit resolution.
  double uniform_at(std::uint64_t index) const noexcept;
  // Standard normal via the inverse CDF of uniform_at(index).
  double normal_at(std::uint64_t index) const noexcept;

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint64_t position_ = 0;
};

// n i.i.d. N(0, I_d) points. Consumes n*d draws from `rng`.
PointMatrix sample_gaussian(int d, std::size_t n, RngStream& rng);

// Fills `out` with standard normals taken from positions
// [rng.position(), rng.position() + out.size()) and advances the stream.
void fill_gaussian(std::span<double> out, RngStream& rng);

// Quadrature rule normalized to a probability measure.
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t size() const noexcept { return nodes.size(); }

  template <class F>
  double integrate(F&& f) const {
    double acc = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) acc += weights[i] * f(nodes[i]);
    return acc;
  }
};

inline constexpr int kMaxQuadratureNodes = 64;

// Probabilists' Gauss-Hermite rule against the N(0,1) density, 1 <= q <= 64.
// Exact for polynomials of degree <= 2q-1.
QuadratureRule gauss_hermite_rule(int q);

// Gauss-Laguerre rule against the density e^{-s} on [0, inf), 1 <= q <= 64.
QuadratureRule gauss_laguerre_rule(int q);

double std_normal_pdf(double x) noexcept;
double std_normal_cdf(double x) noexcept;
// Inverse of std_normal_cdf on (0, 1).
double std_normal_quantile(double p) noexcept;

}  // namespace agnostic
