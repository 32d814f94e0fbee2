#pragma once

#include <cstddef>
#include <span>
#include <string_view>

#include <Eigen/Dense>

#include "agnostic/gaussian.hpp"

namespace agnostic {

// halfspace: labels in {-1, +1}; relu: labels in [-1, 1].
enum class LabelMode { halfspace, relu };

std::string_view to_string(LabelMode mode) noexcept;
LabelMode parse_label_mode(std::string_view text);

struct SampleBatch {
  PointMatrix x;
  Eigen::VectorXd y;
  LabelMode mode = LabelMode::halfspace;

  std::size_t size() const noexcept { return static_cast<std::size_t>(x.rows()); }
  int dimension() const noexcept { return static_cast<int>(x.cols()); }
  bool empty() const noexcept { return x.rows() == 0; }

  std::span<const double> point(std::size_t i) const {
    return {x.row(static_cast<Eigen::Index>(i)).data(), static_cast<std::size_t>(x.cols())};
  }

  // Copy of rows [first, first + count).
  SampleBatch slice(std::size_t first, std::size_t count) const;
};

// Throws DataError on non-finite coordinates/labels or labels outside the
// mode's range, UsageError when x and y disagree in length.
void validate(const SampleBatch& batch);

// Concatenation; both batches must share dimension and mode.
SampleBatch concat(const SampleBatch& a, const SampleBatch& b);

// w . x for every row, summed in a fixed order so that every caller
// (selection, prediction, reports) sees bit-identical margins.
double dot(std::span<const double> w, std::span<const double> x) noexcept;
Eigen::VectorXd margins(const Eigen::VectorXd& w, const PointMatrix& x);

// Source of i.i.d. labeled samples. Learners draw disjoint batches from it
// for each stage.
class DataSource {
 public:
  virtual ~DataSource() = default;
  virtual SampleBatch draw(std::size_t n) = 0;
  virtual int dimension() const = 0;
  virtual LabelMode mode() const = 0;
  // Samples still available, or SIZE_MAX for generators.
  virtual std::size_t remaining() const = 0;
};

// Serves rows of a fixed batch in order; throws UsageError when exhausted.
class BatchSource final : public DataSource {
 public:
  explicit BatchSource(SampleBatch batch);

  SampleBatch draw(std::size_t n) override;
  int dimension() const override { return batch_.dimension(); }
  LabelMode mode() const override { return batch_.mode; }
  std::size_t remaining() const override { return batch_.size() - cursor_; }

 private:
  SampleBatch batch_;
  std::size_t cursor_ = 0;
};

}  // namespace agnostic
