#include "agnostic/hermite.hpp"

#include <cmath>
#include <iomanip>
#include <numeric>
#include <sstream>
#include <string>

#include "agnostic/errors.hpp"

namespace agnostic {
namespace {

// Compositions of `total` into alpha[pos..], leading entries largest first.
void compositions(std::vector<int>& alpha, std::size_t pos, int total,
                  std::vector<MultiIndex>& out) {
  if (pos + 1 == alpha.size()) {
    alpha[pos] = total;
    out.push_back(MultiIndex{alpha});
    return;
  }
  for (int first = total; first >= 0; --first) {
    alpha[pos] = first;
    compositions(alpha, pos + 1, total - first, out);
  }
  alpha[pos] = 0;
}

}  // namespace

int MultiIndex::total_degree() const noexcept {
  return std::accumulate(alpha.begin(), alpha.end(), 0);
}

double feature_count(int d, int k) {
  // binomial(d + k, k) = prod_{j=1..k} (d + j) / j
  double count = 1.0;
  for (int j = 1; j <= k; ++j) count = count * (d + j) / j;
  return std::round(count);
}

namespace {

std::string format_count(double count) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(0) << count;
  return os.str();
}

}  // namespace

std::vector<MultiIndex> enumerate_indices(int d, int k, std::size_t feature_cap) {
  if (d < 1) throw UsageError("dimension must be >= 1, got " + std::to_string(d));
  if (k < 0) throw UsageError("degree bound must be >= 0, got " + std::to_string(k));
  const double count = feature_count(d, k);
  if (count > static_cast<double>(feature_cap)) {
    throw ResourceError("Hermite feature count binomial(" + std::to_string(d + k) + ", " +
                        std::to_string(k) + ") = " + format_count(count) +
                        " exceeds the feature cap " + std::to_string(feature_cap));
  }
  std::vector<MultiIndex> out;
  out.reserve(static_cast<std::size_t>(count));
  std::vector<int> alpha(static_cast<std::size_t>(d), 0);
  for (int total = 0; total <= k; ++total) compositions(alpha, 0, total, out);
  return out;
}

double eval_hermite_1d(int n, double x) {
  if (n < 0) throw UsageError("Hermite degree must be >= 0");
  double h_prev = 0.0;
  double h = 1.0;
  for (int m = 0; m < n; ++m) {
    // sqrt(m+1) H_{m+1} = x H_m - sqrt(m) H_{m-1}
    const double next = (x * h - std::sqrt(static_cast<double>(m)) * h_prev) /
                        std::sqrt(static_cast<double>(m + 1));
    h_prev = h;
    h = next;
  }
  return h;
}

void hermite_table(double x, std::span<double> out) {
  if (out.empty()) return;
  out[0] = 1.0;
  if (out.size() > 1) out[1] = x;
  for (std::size_t m = 1; m + 1 < out.size(); ++m) {
    out[m + 1] = (x * out[m] - std::sqrt(static_cast<double>(m)) * out[m - 1]) /
                 std::sqrt(static_cast<double>(m + 1));
  }
}

HermiteBasis::HermiteBasis(int d, int k, std::size_t feature_cap)
    : d_(d), k_(k), indices_(enumerate_indices(d, k, feature_cap)) {
  for (std::size_t r = 0; r < indices_.size(); ++r) ranks_.emplace(indices_[r].alpha, r);

  raised_.assign(indices_.size() * static_cast<std::size_t>(d_), -1);
  for (std::size_t r = 0; r < indices_.size(); ++r) {
    if (indices_[r].total_degree() >= k_) continue;
    std::vector<int> up = indices_[r].alpha;
    for (int i = 0; i < d_; ++i) {
      ++up[static_cast<std::size_t>(i)];
      raised_[r * static_cast<std::size_t>(d_) + static_cast<std::size_t>(i)] =
          static_cast<std::ptrdiff_t>(ranks_.at(up));
      --up[static_cast<std::size_t>(i)];
    }
  }

  support_offset_.reserve(indices_.size() + 1);
  support_offset_.push_back(0);
  for (const MultiIndex& idx : indices_) {
    for (int i = 0; i < d_; ++i) {
      const int p = idx.alpha[static_cast<std::size_t>(i)];
      if (p > 0) {
        support_coord_.push_back(i);
        support_power_.push_back(p);
      }
    }
    support_offset_.push_back(support_coord_.size());
  }
}

std::ptrdiff_t HermiteBasis::rank_of(const MultiIndex& alpha) const {
  const auto it = ranks_.find(alpha.alpha);
  return it == ranks_.end() ? -1 : static_cast<std::ptrdiff_t>(it->second);
}

void HermiteBasis::features(std::span<const double> x, std::span<double> out) const {
  const std::size_t stride = static_cast<std::size_t>(k_) + 1;
  std::vector<double> table(static_cast<std::size_t>(d_) * stride);
  for (int i = 0; i < d_; ++i) {
    hermite_table(x[static_cast<std::size_t>(i)],
                  std::span<double>(table.data() + static_cast<std::size_t>(i) * stride, stride));
  }
  for (std::size_t r = 0; r < indices_.size(); ++r) {
    double v = 1.0;
    for (std::size_t s = support_offset_[r]; s < support_offset_[r + 1]; ++s) {
      v *= table[static_cast<std::size_t>(support_coord_[s]) * stride +
                 static_cast<std::size_t>(support_power_[s])];
    }
    out[r] = v;
  }
}

PointMatrix HermiteBasis::feature_block(const PointMatrix& points, std::size_t first,
                                        std::size_t count) const {
  if (points.cols() != d_) {
    throw UsageError("point dimension " + std::to_string(points.cols()) +
                     " does not match basis dimension " + std::to_string(d_));
  }
  PointMatrix block(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(size()));
  for (std::size_t i = 0; i < count; ++i) {
    const auto row = static_cast<Eigen::Index>(first + i);
    features(std::span<const double>(points.row(row).data(), static_cast<std::size_t>(d_)),
             std::span<double>(block.row(static_cast<Eigen::Index>(i)).data(), size()));
  }
  return block;
}

HermitePoly::HermitePoly(std::shared_ptr<const HermiteBasis> basis)
    : basis_(std::move(basis)),
      coeffs_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(basis_->size()))) {}

HermitePoly::HermitePoly(std::shared_ptr<const HermiteBasis> basis, Eigen::VectorXd coeffs)
    : basis_(std::move(basis)), coeffs_(std::move(coeffs)) {
  if (static_cast<std::size_t>(coeffs_.size()) != basis_->size()) {
    throw UsageError("coefficient vector length " + std::to_string(coeffs_.size()) +
                     " does not match basis size " + std::to_string(basis_->size()));
  }
}

double HermitePoly::coeff(const MultiIndex& alpha) const {
  const std::ptrdiff_t r = basis_->rank_of(alpha);
  return r < 0 ? 0.0 : coeffs_[r];
}

void HermitePoly::set_coeff(const MultiIndex& alpha, double value) {
  const std::ptrdiff_t r = basis_->rank_of(alpha);
  if (r < 0) throw UsageError("multi-index is not part of the polynomial's basis");
  coeffs_[r] = value;
}

double HermitePoly::operator()(std::span<const double> x) const {
  if (x.size() != static_cast<std::size_t>(dimension())) {
    throw UsageError("point dimension " + std::to_string(x.size()) +
                     " does not match polynomial dimension " + std::to_string(dimension()));
  }
  std::vector<double> phi(basis_->size());
  basis_->features(x, phi);
  return Eigen::Map<const Eigen::VectorXd>(phi.data(), static_cast<Eigen::Index>(phi.size()))
      .dot(coeffs_);
}

Eigen::VectorXd HermitePoly::evaluate(const PointMatrix& points) const {
  if (points.cols() != dimension()) {
    throw UsageError("point dimension " + std::to_string(points.cols()) +
                     " does not match polynomial dimension " + std::to_string(dimension()));
  }
  Eigen::VectorXd out(points.rows());
  std::vector<double> phi(basis_->size());
  const Eigen::Map<const Eigen::VectorXd> features(phi.data(), static_cast<Eigen::Index>(phi.size()));
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    basis_->features(std::span<const double>(points.row(i).data(), static_cast<std::size_t>(dimension())),
                     phi);
    out[i] = features.dot(coeffs_);
  }
  return out;
}

HermitePoly gradient_coeffs(const HermitePoly& poly, int coord) {
  const HermiteBasis& basis = poly.basis();
  if (coord < 0 || coord >= basis.dimension()) {
    throw UsageError("gradient coordinate " + std::to_string(coord) + " out of range");
  }
  auto lower = std::make_shared<const HermiteBasis>(basis.dimension(), std::max(basis.degree() - 1, 0),
                                                    std::max<std::size_t>(basis.size(), 1));
  HermitePoly grad(lower);
  if (basis.degree() == 0) return grad;
  // The degree-(k-1) indices are a prefix of the degree-k ordering.
  for (std::size_t r = 0; r < lower->size(); ++r) {
    const std::ptrdiff_t up = basis.raised(r, coord);
    const int beta_i = lower->index(r).alpha[static_cast<std::size_t>(coord)];
    grad.coeffs()[static_cast<Eigen::Index>(r)] =
        std::sqrt(static_cast<double>(beta_i + 1)) * poly.coeffs()[up];
  }
  return grad;
}

double parseval_norm_sq(const HermitePoly& poly) { return poly.coeffs().squaredNorm(); }

double influence_trace(const HermitePoly& poly) {
  double acc = 0.0;
  for (std::size_t r = 0; r < poly.basis().size(); ++r) {
    const double c = poly.coeffs()[static_cast<Eigen::Index>(r)];
    acc += poly.basis().index(r).total_degree() * c * c;
  }
  return acc;
}

}  // namespace agnostic
