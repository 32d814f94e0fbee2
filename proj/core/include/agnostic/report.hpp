#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "agnostic/cover.hpp"
#include "agnostic/datasets.hpp"
#include "agnostic/proper.hpp"
#include "agnostic/ptas.hpp"
#include "agnostic/relu.hpp"
#include "agnostic/timing.hpp"

namespace agnostic {

using Json = nlohmann::json;

inline constexpr int kReportSchemaVersion = 1;

Json to_json(const HalfspaceHypothesis& h);
Json to_json(const ReluHypothesis& h);
Json to_json(const Timings& timings);
Json to_json(const Eigen::VectorXd& v);

// Configs serialize every field; unset optionals become null. The readers
// accept partial objects (missing keys keep their defaults) and throw
// ConfigError naming the offending field.
Json to_json(const ProperLearnerConfig& config);
Json to_json(const PtasConfig& config);
Json to_json(const ReluLearnerConfig& config);
ProperLearnerConfig proper_config_from_json(const Json& j);
PtasConfig ptas_config_from_json(const Json& j);
ReluLearnerConfig relu_config_from_json(const Json& j);

// Stage metrics without timings.
Json metrics_json(const ProperRunResult& result);
Json metrics_json(const PtasRunResult& result);
Json metrics_json(const ReluRunResult& result);

struct RunReport {
  std::string command;
  Json config;
  Json metrics;
  std::vector<std::string> flags;
  Timings timings;
  int threads = 1;
};

// {schema_version, command, config, metrics, flags, runtime: {threads, timings}}
// with keys sorted. Everything outside "runtime" is reproducible.
Json to_json(const RunReport& report);
std::string serialize(const RunReport& report);

// Drops the "runtime" section.
Json comparable_fields(const Json& report);

}  // namespace agnostic
