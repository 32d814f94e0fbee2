#include "experiment.hpp"

#include <algorithm>
#include <cstdio>
#include <memory>
#include <set>
#include <sstream>

#include "agnostic/errors.hpp"
#include "agnostic/parallel.hpp"

namespace agnostic::cli {
namespace {

constexpr std::uint64_t kModelStream = 1;
constexpr std::uint64_t kTrainStream = 2;
constexpr std::uint64_t kTestStream = 3;

Json data_to_json(const DataSpec& d) {
  return Json{{"path", d.path},           {"kind", std::string(to_string(d.kind))},
              {"d", d.d},                 {"n", d.n},
              {"noise", d.noise.to_string()}, {"t_star", d.t_star},
              {"scale", d.scale},         {"seed", d.seed},
              {"n_test", d.n_test},       {"oracle_resolution", d.oracle_resolution}};
}

template <class T>
void read_field(const Json& j, const char* key, T& out) {
  const auto it = j.find(key);
  if (it == j.end()) return;
  try {
    out = it->template get<T>();
  } catch (const Json::exception&) {
    throw ConfigError("data." + std::string(key) + " has the wrong type");
  }
}

DataSpec data_from_json(const Json& j) {
  if (!j.is_object()) throw ConfigError("data must be a JSON object");
  static const std::set<std::string> known{"path", "kind",  "d",    "n",      "noise",
                                           "t_star", "scale", "seed", "n_test", "oracle_resolution"};
  for (const auto& item : j.items()) {
    if (!known.count(item.key())) throw ConfigError("unknown field data." + item.key());
  }
  DataSpec d;
  read_field(j, "path", d.path);
  std::string kind(to_string(d.kind));
  read_field(j, "kind", kind);
  d.kind = parse_label_mode(kind);
  read_field(j, "d", d.d);
  read_field(j, "n", d.n);
  std::string noise = d.noise.to_string();
  read_field(j, "noise", noise);
  d.noise = NoiseSpec::parse(noise);
  read_field(j, "t_star", d.t_star);
  read_field(j, "scale", d.scale);
  read_field(j, "seed", d.seed);
  read_field(j, "n_test", d.n_test);
  read_field(j, "oracle_resolution", d.oracle_resolution);
  return d;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

int auto_oracle_resolution(int d) { return d == 2 ? 720 : 60; }

}  // namespace

std::string_view command_name(Algorithm algorithm) noexcept {
  switch (algorithm) {
    case Algorithm::proper: return "learn-halfspace";
    case Algorithm::ptas: return "ptas";
    case Algorithm::relu: return "learn-relu";
  }
  return "learn-halfspace";
}

Algorithm parse_algorithm(std::string_view text) {
  if (text == "learn-halfspace") return Algorithm::proper;
  if (text == "ptas") return Algorithm::ptas;
  if (text == "learn-relu") return Algorithm::relu;
  throw ConfigError("unknown algorithm '" + std::string(text) + "' (learn-halfspace, ptas, learn-relu)");
}

PlantedModel planted_model(const DataSpec& data) {
  RngStream rng = RngStream(data.seed).substream(kModelStream);
  PlantedModel model = make_planted(data.kind, data.d, data.noise, rng, data.t_star, data.scale);
  validate(model);
  return model;
}

GeneratedBatch generate_dataset(const DataSpec& data) {
  if (!data.planted()) throw UsageError("generate_dataset needs a planted data spec");
  if (data.n == 0) throw ConfigError("data.n must be >= 1 to generate a dataset");
  const PlantedModel model = planted_model(data);
  RngStream rng = RngStream(data.seed).substream(kTrainStream);
  return generate(model, data.n, rng);
}

void ExperimentConfig::validate() const {
  const LabelMode wanted = algorithm == Algorithm::relu ? LabelMode::relu : LabelMode::halfspace;
  if (data.planted()) {
    if (data.d < 1) throw ConfigError("data.d must be >= 1");
    if (data.kind != wanted) throw ConfigError("data.kind must be " + std::string(to_string(wanted)));
    PlantedModel probe;
    probe.kind = data.kind;
    probe.w_star = Eigen::VectorXd::Unit(data.d, 0);
    probe.t_star = data.t_star;
    probe.scale = data.scale;
    probe.noise = data.noise;
    agnostic::validate(probe);
  }
  if (data.oracle_resolution < -1 || (data.oracle_resolution > 0 && data.oracle_resolution < 4)) {
    throw ConfigError("data.oracle_resolution must be -1, 0 or >= 4");
  }
  switch (algorithm) {
    case Algorithm::proper: proper.validate(); break;
    case Algorithm::ptas: ptas.validate(); break;
    case Algorithm::relu: relu.validate(); break;
  }
}

Json ExperimentConfig::to_json() const {
  Json learner;
  switch (algorithm) {
    case Algorithm::proper: learner = agnostic::to_json(proper); break;
    case Algorithm::ptas: learner = agnostic::to_json(ptas); break;
    case Algorithm::relu: learner = agnostic::to_json(relu); break;
  }
  return Json{{"algorithm", std::string(command_name(algorithm))}, {"data", data_to_json(data)}, {"learner", learner}};
}

ExperimentConfig ExperimentConfig::from_json(const Json& j) {
  if (!j.is_object()) throw ConfigError("experiment config must be a JSON object");
  for (const auto& item : j.items()) {
    if (item.key() != "algorithm" && item.key() != "data" && item.key() != "learner") {
      throw ConfigError("unknown field " + item.key());
    }
  }
  ExperimentConfig c;
  if (j.contains("algorithm")) {
    if (!j["algorithm"].is_string()) throw ConfigError("algorithm must be a string");
    c.algorithm = parse_algorithm(j["algorithm"].get<std::string>());
  }
  if (j.contains("data")) c.data = data_from_json(j["data"]);
  const Json learner = j.contains("learner") ? j["learner"] : Json::object();
  switch (c.algorithm) {
    case Algorithm::proper: c.proper = proper_config_from_json(learner); break;
    case Algorithm::ptas: c.ptas = ptas_config_from_json(learner); break;
    case Algorithm::relu: c.relu = relu_config_from_json(learner); break;
  }
  return c;
}

bool ExperimentConfig::operator==(const ExperimentConfig& other) const {
  if (algorithm != other.algorithm || !(data == other.data)) return false;
  switch (algorithm) {
    case Algorithm::proper: return proper == other.proper;
    case Algorithm::ptas: return ptas == other.ptas;
    case Algorithm::relu: return relu == other.relu;
  }
  return false;
}

ExperimentOutcome run_experiment(const ExperimentConfig& config) {
  config.validate();
  ExperimentOutcome outcome;
  RunReport& report = outcome.report;
  report.command = std::string(command_name(config.algorithm));
  report.config = config.to_json();
  report.threads = static_cast<int>(worker_threads());

  const RngStream root(config.data.seed);
  std::unique_ptr<DataSource> source;
  std::optional<PlantedModel> model;
  std::optional<SampleBatch> test;
  Json data_metrics = Json::object();
  if (config.data.planted()) {
    model = planted_model(config.data);
    if (config.data.n > 0) {
      GeneratedBatch train = generate_dataset(config.data);
      data_metrics["n_corrupted"] = train.n_corrupted;
      source = std::make_unique<BatchSource>(std::move(train.batch));
    } else {
      source = std::make_unique<PlantedSource>(*model, root.substream(kTrainStream));
    }
    if (config.data.n_test > 0) {
      RngStream rng = root.substream(kTestStream);
      test = generate(*model, config.data.n_test, rng).batch;
    }
    data_metrics["w_star"] = agnostic::to_json(model->w_star);
    const PopulationOpt opt = population_opt(*model);
    data_metrics["population_opt"] = Json{{"value", opt.value ? Json(*opt.value) : Json(nullptr)},
                                          {"upper_bound_only", opt.upper_bound_only},
                                          {"note", opt.note}};
    const std::optional<double> planted = planted_error(*model);
    data_metrics["planted_error"] = planted ? Json(*planted) : Json(nullptr);
  } else {
    SampleBatch batch = read_csv_file(config.data.path);
    data_metrics["rows"] = batch.size();
    data_metrics["d"] = batch.dimension();
    source = std::make_unique<BatchSource>(std::move(batch));
  }

  std::ostringstream summary;
  summary << report.command << ":";
  Json test_metrics = nullptr;
  switch (config.algorithm) {
    case Algorithm::proper:
    case Algorithm::ptas: {
      HalfspaceHypothesis h;
      if (config.algorithm == Algorithm::proper) {
        ProperRunResult r = learn_proper_halfspace(config.proper, *source);
        report.metrics = metrics_json(r);
        report.flags = r.flags;
        report.timings = r.timings;
        h = r.hypothesis;
        summary << " holdout_error=" << fmt(r.holdout_error) << " rank=" << r.subspace.rank()
                << " grid=" << r.grid_size;
      } else {
        PtasRunResult r = learn_ptas(config.ptas, *source);
        report.metrics = metrics_json(r);
        report.flags = r.flags;
        report.timings = r.timings;
        h = r.hypothesis;
        summary << " final_error=" << fmt(r.final_error) << " opt_hat=" << fmt(r.opt_hat)
                << (r.early_exit ? " early_exit" : "")
                << (r.validation ? (r.validation->pass ? " validation=pass" : " validation=fail") : "");
      }
      if (test) {
        const double err = zero_one_error(h, *test);
        outcome.test_metric = err;
        test_metrics = Json{{"n_test", test->size()}, {"test_error", err}, {"oracle", nullptr}};
        summary << " test_error=" << fmt(err);
        const int d = test->dimension();
        if (d >= 2 && d <= 3 && config.data.oracle_resolution != 0) {
          const int res = config.data.oracle_resolution > 0 ? config.data.oracle_resolution : auto_oracle_resolution(d);
          const OracleResult oracle = opt_oracle_grid(*test, res);
          test_metrics["oracle"] = Json{{"empirical_opt", oracle.empirical_opt},
                                        {"angular_resolution", res},
                                        {"directions", oracle.directions},
                                        {"angular_spacing", oracle.angular_spacing},
                                        {"optimistic", oracle.optimistic},
                                        {"best", agnostic::to_json(oracle.best)},
                                        {"gap", err - oracle.empirical_opt}};
          summary << " oracle_opt=" << fmt(oracle.empirical_opt);
        }
      }
      break;
    }
    case Algorithm::relu: {
      ReluRunResult r = learn_relu(config.relu, *source);
      report.metrics = metrics_json(r);
      report.flags = r.flags;
      report.timings = r.timings;
      summary << " holdout_mse=" << fmt(r.holdout_loss) << " rank=" << r.subspace.rank() << " grid=" << r.grid_size;
      if (test) {
        const double mse = squared_loss(r.hypothesis, *test);
        outcome.test_metric = mse;
        test_metrics = Json{{"n_test", test->size()}, {"test_mse", mse}};
        summary << " test_mse=" << fmt(mse);
      }
      break;
    }
  }
  report.metrics["test"] = test_metrics;
  report.metrics["data"] = data_metrics;
  outcome.validation_flagged =
      std::find(report.flags.begin(), report.flags.end(), "validation_failed") != report.flags.end();
  if (!report.flags.empty()) {
    summary << " flags=";
    for (std::size_t i = 0; i < report.flags.size(); ++i) summary << (i ? "," : "") << report.flags[i];
  }
  outcome.summary = summary.str();
  return outcome;
}

}  // namespace agnostic::cli
