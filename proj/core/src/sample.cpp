#include "agnostic/sample.hpp"

#include <cmath>
#include <string>

#include "agnostic/errors.hpp"

namespace agnostic {

std::string_view to_string(LabelMode mode) noexcept {
  return mode == LabelMode::halfspace ? "halfspace" : "relu";
}

LabelMode parse_label_mode(std::string_view text) {
  if (text == "halfspace") return LabelMode::halfspace;
  if (text == "relu") return LabelMode::relu;
  throw ConfigError("unknown label mode '" + std::string(text) + "' (expected halfspace|relu)");
}

SampleBatch SampleBatch::slice(std::size_t first, std::size_t count) const {
  if (first + count > size()) throw UsageError("batch slice out of range");
  const auto f = static_cast<Eigen::Index>(first);
  const auto c = static_cast<Eigen::Index>(count);
  return SampleBatch{x.middleRows(f, c), y.segment(f, c), mode};
}

void validate(const SampleBatch& batch) {
  if (batch.x.rows() != batch.y.size()) {
    throw UsageError("batch has " + std::to_string(batch.x.rows()) + " points but " +
                     std::to_string(batch.y.size()) + " labels");
  }
  if (!batch.x.allFinite()) throw DataError("batch contains non-finite coordinates");
  for (Eigen::Index i = 0; i < batch.y.size(); ++i) {
    const double y = batch.y[i];
    if (!std::isfinite(y)) throw DataError("non-finite label at row " + std::to_string(i));
    if (batch.mode == LabelMode::halfspace && y != 1.0 && y != -1.0) {
      throw DataError("halfspace label at row " + std::to_string(i) + " is not +/-1");
    }
    if (batch.mode == LabelMode::relu && std::abs(y) > 1.0) {
      throw DataError("relu label at row " + std::to_string(i) + " is outside [-1, 1]");
    }
  }
}

SampleBatch concat(const SampleBatch& a, const SampleBatch& b) {
  if (a.empty()) return b;
  if (b.empty()) return a;
  if (a.dimension() != b.dimension() || a.mode != b.mode) {
    throw UsageError("cannot concatenate batches of different dimension or mode");
  }
  SampleBatch out;
  out.mode = a.mode;
  out.x.resize(a.x.rows() + b.x.rows(), a.x.cols());
  out.x << a.x, b.x;
  out.y.resize(a.y.size() + b.y.size());
  out.y << a.y, b.y;
  return out;
}

double dot(std::span<const double> w, std::span<const double> x) noexcept {
  double acc = 0.0;
  for (std::size_t j = 0; j < w.size(); ++j) acc += w[j] * x[j];
  return acc;
}

Eigen::VectorXd margins(const Eigen::VectorXd& w, const PointMatrix& x) {
  Eigen::VectorXd out(x.rows());
  const std::span<const double> ws(w.data(), static_cast<std::size_t>(w.size()));
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    out[i] = dot(ws, std::span<const double>(x.row(i).data(), static_cast<std::size_t>(x.cols())));
  }
  return out;
}

BatchSource::BatchSource(SampleBatch batch) : batch_(std::move(batch)) { validate(batch_); }

SampleBatch BatchSource::draw(std::size_t n) {
  if (n > remaining()) {
    throw UsageError("data source exhausted: requested " + std::to_string(n) + " samples, " +
                     std::to_string(remaining()) + " remain");
  }
  SampleBatch out = batch_.slice(cursor_, n);
  cursor_ += n;
  return out;
}

}  // namespace agnostic
