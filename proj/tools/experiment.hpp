#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "agnostic/datasets.hpp"
#include "agnostic/proper.hpp"
#include "agnostic/ptas.hpp"
#include "agnostic/relu.hpp"
#include "agnostic/report.hpp"

namespace agnostic::cli {

// Where the samples come from: a dataset CSV, or a planted model drawn from
// `seed`. With n == 0 a planted source is an unbounded generator.
struct DataSpec {
  std::string path;
  LabelMode kind = LabelMode::halfspace;
  int d = 2;
  std::size_t n = 0;
  NoiseSpec noise;
  double t_star = 0.0;
  double scale = 1.0;
  std::uint64_t seed = 0;
  std::size_t n_test = 20'000;  // fresh planted test points; ignored for CSV data
  int oracle_resolution = -1;   // -1 auto (planted halfspaces with d <= 3), 0 off

  bool planted() const noexcept { return path.empty(); }
  bool operator==(const DataSpec&) const = default;
};

enum class Algorithm { proper, ptas, relu };

std::string_view command_name(Algorithm algorithm) noexcept;
Algorithm parse_algorithm(std::string_view text);

struct ExperimentConfig {
  Algorithm algorithm = Algorithm::proper;
  DataSpec data;
  ProperLearnerConfig proper;
  PtasConfig ptas;
  ReluLearnerConfig relu;

  // Checks the data spec and the active learner config; throws ConfigError
  // naming the field.
  void validate() const;
  // Only the active learner config is written.
  Json to_json() const;
  static ExperimentConfig from_json(const Json& j);
  // Compares the data spec and the active learner config.
  bool operator==(const ExperimentConfig& other) const;
};

struct ExperimentOutcome {
  RunReport report;
  bool validation_flagged = false;
  std::optional<double> test_metric;  // 0-1 test error, or test MSE for relu
  std::string summary;
};

ExperimentOutcome run_experiment(const ExperimentConfig& config);

// Planted model for a data spec; the same seed always gives the same w*.
PlantedModel planted_model(const DataSpec& data);

}  // namespace agnostic::cli

namespace agnostic::cli {

// The training sample a planted data spec produces for n > 0; the learners
// see exactly these rows when run on the same spec.
GeneratedBatch generate_dataset(const DataSpec& data);

}  // namespace agnostic::cli
