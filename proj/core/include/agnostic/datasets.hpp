#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>

#include <Eigen/Dense>

#include "agnostic/cover.hpp"
#include "agnostic/gaussian.hpp"
#include "agnostic/sample.hpp"

namespace agnostic {

// Label corruption applied after the planted labels are computed.
//   clean                      no corruption
//   rcn:RATE                   flip each label with probability RATE
//   band_flip:WIDTH            flip labels with |w*.x + t*| <= WIDTH
//   far_flip:BUDGET:RADIUS     flip labels with |w*.x + t*| >= RADIUS, each with
//                              probability min(1, BUDGET / P[|w*.x + t*| >= RADIUS])
//   additive_uniform:AMP       (relu only) add Uniform(-AMP, AMP), then clip
struct NoiseSpec {
  enum class Model { clean, rcn, band_flip, far_flip, additive_uniform };

  Model model = Model::clean;
  double rate = 0.0;
  double width = 0.0;
  double budget = 0.0;
  double radius = 0.0;
  double amplitude = 0.0;

  static NoiseSpec parse(std::string_view text);
  std::string to_string() const;

  bool operator==(const NoiseSpec&) const = default;
};

struct PlantedModel {
  LabelMode kind = LabelMode::halfspace;
  Eigen::VectorXd w_star;
  double t_star = 0.0;
  // relu only: labels are clip(scale * max(0, w*.x + t*)).
  double scale = 1.0;
  NoiseSpec noise;

  int dimension() const noexcept { return static_cast<int>(w_star.size()); }
};

// Throws ConfigError for invalid parameters.
void validate(const PlantedModel& model);

// Planted model with w* drawn uniformly from the unit sphere.
PlantedModel make_planted(LabelMode kind, int d, const NoiseSpec& noise, RngStream& rng,
                          double t_star = 0.0, double scale = 1.0);

struct GeneratedBatch {
  SampleBatch batch;
  std::size_t n_corrupted = 0;
};

// x ~ N(0, I) from positions [p, p + n*d) of `rng`, corruption coins from the
// following n positions.
GeneratedBatch generate(const PlantedModel& model, std::size_t n, RngStream& rng);

// Infinite i.i.d. source for a planted model.
class PlantedSource final : public DataSource {
 public:
  PlantedSource(PlantedModel model, RngStream rng);

  SampleBatch draw(std::size_t n) override;
  int dimension() const override { return model_.dimension(); }
  LabelMode mode() const override { return model_.kind; }
  std::size_t remaining() const override;

  const PlantedModel& model() const noexcept { return model_; }
  std::size_t drawn() const noexcept { return drawn_; }
  std::size_t corrupted() const noexcept { return corrupted_; }

 private:
  PlantedModel model_;
  RngStream rng_;
  std::size_t drawn_ = 0;
  std::size_t corrupted_ = 0;
};

struct PopulationOpt {
  std::optional<double> value;
  bool upper_bound_only = false;
  std::string note;
};

// Closed-form 0-1 OPT where available: clean -> 0, rcn(r) -> r,
// band_flip -> err(w*) reported as an upper bound, otherwise unknown.
PopulationOpt population_opt(const PlantedModel& model);

// Population 0-1 error of the planted halfspace itself under its noise model.
std::optional<double> planted_error(const PlantedModel& model);

struct OracleResult {
  HalfspaceHypothesis best;
  double empirical_opt = 0.0;
  std::size_t directions = 0;
  // Angular spacing of the direction grid (radians); the scan is exact over
  // thresholds, so this is the only resolution slack.
  double angular_spacing = 0.0;
  // Minimizing on the evaluation batch itself undershoots population OPT.
  bool optimistic = true;
};

inline constexpr std::size_t kDefaultOracleCap = 1'000'000;

// Exhaustive scan for d <= 3: a spherical direction grid crossed with every
// distinct threshold (exact continuous threshold search), plus constants.
OracleResult opt_oracle_grid(const SampleBatch& batch, int angular_resolution,
                             std::size_t cap = kDefaultOracleCap);

// Dataset CSV: "d,<d>,n,<n>,mode,<halfspace|relu>" then n rows "x_1,...,x_d,y"
// in shortest round-trip decimal form.
void write_csv(const SampleBatch& batch, std::ostream& out);
SampleBatch read_csv(std::istream& in);
void write_csv_file(const SampleBatch& batch, const std::string& path);
SampleBatch read_csv_file(const std::string& path);

// Shortest decimal representation that parses back to the same double.
std::string format_double(double value);

}  // namespace agnostic
