#include "cli.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <sstream>

#include "agnostic/errors.hpp"
#include "agnostic/parallel.hpp"
#include "experiment.hpp"
#include "verify.hpp"

namespace agnostic::cli {
namespace {

using Apply = std::function<void(ExperimentConfig&)>;

// Options only override the config when given on the command line, so that
// a --config file and flags compose.
class Flags {
 public:
  explicit Flags(CLI::App* app) : app_(app) {}

  template <class T, class Set>
  void add(const std::string& name, const std::string& help, Set set) {
    auto value = std::make_shared<T>();
    CLI::Option* opt = app_->add_option(name, *value, help);
    applies_.push_back([opt, value, set](ExperimentConfig& c) {
      if (opt->count() > 0) set(c, *value);
    });
  }

  void add_flag(const std::string& name, const std::string& help, std::function<void(ExperimentConfig&)> set) {
    CLI::Option* opt = app_->add_flag(name, help);
    applies_.push_back([opt, set](ExperimentConfig& c) {
      if (opt->count() > 0) set(c);
    });
  }

  void apply(ExperimentConfig& c) const {
    for (const Apply& a : applies_) a(c);
  }

 private:
  CLI::App* app_;
  std::vector<Apply> applies_;
};

void add_data_flags(Flags& f) {
  f.add<std::string>("--data", "dataset CSV (otherwise a planted model is used)",
                     [](ExperimentConfig& c, const std::string& v) { c.data.path = v; });
  f.add<int>("--d", "dimension of the planted model", [](ExperimentConfig& c, int v) { c.data.d = v; });
  f.add<std::size_t>("--n", "planted training samples (0: unbounded generator)",
                     [](ExperimentConfig& c, std::size_t v) { c.data.n = v; });
  f.add<std::string>("--model", "noise model: clean, rcn:R, band_flip:W, far_flip:B:R, additive_uniform:A",
                     [](ExperimentConfig& c, const std::string& v) { c.data.noise = NoiseSpec::parse(v); });
  f.add<double>("--t-star", "planted bias", [](ExperimentConfig& c, double v) { c.data.t_star = v; });
  f.add<double>("--scale", "planted relu amplitude", [](ExperimentConfig& c, double v) { c.data.scale = v; });
  f.add<std::uint64_t>("--seed", "random seed", [](ExperimentConfig& c, std::uint64_t v) { c.data.seed = v; });
  f.add<std::size_t>("--n-test", "fresh planted test samples", [](ExperimentConfig& c, std::size_t v) { c.data.n_test = v; });
  f.add<int>("--oracle-resolution", "direction grid of the OPT oracle (-1 auto, 0 off)",
             [](ExperimentConfig& c, int v) { c.data.oracle_resolution = v; });
}

void add_proper_flags(Flags& f) {
  f.add<double>("--eps", "target accuracy and cover radius", [](ExperimentConfig& c, double v) { c.proper.eps = v; });
  f.add<double>("--delta", "failure probability", [](ExperimentConfig& c, double v) { c.proper.delta = v; });
  f.add<int>("--degree", "regression degree k", [](ExperimentConfig& c, int v) { c.proper.degree = v; });
  f.add<double>("--eta", "influence threshold", [](ExperimentConfig& c, double v) { c.proper.eta = v; });
  f.add<int>("--repeats", "regression folds", [](ExperimentConfig& c, int v) { c.proper.repeats = v; });
  f.add<double>("--validation-fraction", "validation fold fraction",
                [](ExperimentConfig& c, double v) { c.proper.validation_fraction = v; });
  f.add<std::size_t>("--n-regression", "regression samples", [](ExperimentConfig& c, std::size_t v) { c.proper.n_regression = v; });
  f.add<std::size_t>("--n-holdout", "selection samples", [](ExperimentConfig& c, std::size_t v) { c.proper.n_holdout = v; });
  f.add<double>("--ridge", "ridge per sample", [](ExperimentConfig& c, double v) { c.proper.ridge_per_sample = v; });
  f.add<std::size_t>("--feature-cap", "maximum Hermite features", [](ExperimentConfig& c, std::size_t v) { c.proper.feature_cap = v; });
  f.add<std::size_t>("--enumeration-cap", "maximum grid candidates",
                     [](ExperimentConfig& c, std::size_t v) { c.proper.enumeration_cap = v; });
  f.add_flag("--brute-force", "search all of R^d instead of the influence subspace",
             [](ExperimentConfig& c) { c.proper.brute_force = true; });
}

void add_ptas_flags(Flags& f) {
  f.add<double>("--gamma", "multiplicative slack", [](ExperimentConfig& c, double v) { c.ptas.gamma = v; });
  f.add<double>("--eps", "additive accuracy", [](ExperimentConfig& c, double v) { c.ptas.eps = v; });
  f.add<double>("--delta", "failure probability", [](ExperimentConfig& c, double v) { c.ptas.delta = v; });
  f.add<std::size_t>("--n-init", "initializer samples", [](ExperimentConfig& c, std::size_t v) { c.ptas.n_init = v; });
  f.add<std::size_t>("--n-estimate", "OPT estimate samples", [](ExperimentConfig& c, std::size_t v) { c.ptas.n_estimate = v; });
  f.add<std::size_t>("--n-pool", "samples offered to rejection sampling",
                     [](ExperimentConfig& c, std::size_t v) { c.ptas.n_pool = v; });
  f.add<double>("--inner-eps", "accuracy of the inner proper run", [](ExperimentConfig& c, double v) { c.ptas.inner_eps = v; });
  f.add<int>("--inner-degree", "degree of the inner proper run", [](ExperimentConfig& c, int v) { c.ptas.inner_degree = v; });
  f.add<double>("--inner-eta", "influence threshold of the inner run", [](ExperimentConfig& c, double v) { c.ptas.inner_eta = v; });
  f.add<double>("--kappa", "validation constant", [](ExperimentConfig& c, double v) { c.ptas.kappa = v; });
  f.add<double>("--sigma-constant", "sigma = C * OPT_hat / gamma", [](ExperimentConfig& c, double v) { c.ptas.sigma_constant = v; });
  f.add<double>("--early-exit-constant", "early exit when eps > C * OPT_hat",
                [](ExperimentConfig& c, double v) { c.ptas.early_exit_constant = v; });
  f.add<double>("--alpha-divisor", "alpha = gamma / divisor", [](ExperimentConfig& c, double v) { c.ptas.alpha_divisor = v; });
  f.add<std::uint64_t>("--coin-seed", "seed of the rejection coins", [](ExperimentConfig& c, std::uint64_t v) { c.ptas.seed = v; });
}

void add_relu_flags(Flags& f) {
  f.add<double>("--eps", "target excess loss and cover radius", [](ExperimentConfig& c, double v) { c.relu.eps = v; });
  f.add<double>("--delta", "failure probability", [](ExperimentConfig& c, double v) { c.relu.delta = v; });
  f.add<int>("--degree", "regression degree k", [](ExperimentConfig& c, int v) { c.relu.degree = v; });
  f.add<double>("--eta", "influence threshold", [](ExperimentConfig& c, double v) { c.relu.eta = v; });
  f.add<std::size_t>("--n-regression", "regression samples", [](ExperimentConfig& c, std::size_t v) { c.relu.n_regression = v; });
  f.add<std::size_t>("--n-holdout", "selection samples", [](ExperimentConfig& c, std::size_t v) { c.relu.n_holdout = v; });
  f.add<double>("--scale-constant", "scale grid step eps / A", [](ExperimentConfig& c, double v) { c.relu.scale_constant = v; });
  f.add<double>("--bias-negative", "bias grid reaches -B sqrt(ln(1/eps))",
                [](ExperimentConfig& c, double v) { c.relu.bias_negative = v; });
  f.add<double>("--bias-positive", "bias grid reaches +B'", [](ExperimentConfig& c, double v) { c.relu.bias_positive = v; });
  f.add<std::size_t>("--enumeration-cap", "maximum grid candidates",
                     [](ExperimentConfig& c, std::size_t v) { c.relu.enumeration_cap = v; });
}

std::string output_path(const std::string& given, const std::string& fallback_name) {
  if (!given.empty()) return given;
  const char* dir = std::getenv(kOutDirEnv);
  const std::filesystem::path base = dir && *dir ? std::filesystem::path(dir) : std::filesystem::path(".");
  return (base / fallback_name).string();
}

void write_text(const std::string& path, const std::string& text) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream f(p, std::ios::binary);
  if (!f) throw ResourceError("cannot open " + path + " for writing");
  f << text;
  if (!f) throw ResourceError("failed writing " + path);
}

ExperimentConfig load_config(const std::string& path, Algorithm algorithm) {
  if (path.empty()) {
    ExperimentConfig c;
    c.algorithm = algorithm;
    return c;
  }
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read config file " + path);
  Json j;
  try {
    j = Json::parse(f);
  } catch (const Json::exception& e) {
    throw ConfigError("config file " + path + " is not valid JSON: " + e.what());
  }
  if (!j.contains("algorithm")) j["algorithm"] = std::string(command_name(algorithm));
  ExperimentConfig c = ExperimentConfig::from_json(j);
  if (c.algorithm != algorithm) throw ConfigError("config file is for " + std::string(command_name(c.algorithm)));
  return c;
}

std::vector<double> parse_values(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.find_first_not_of(" \t") == std::string::npos) continue;
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("--values entry '" + item + "' is not a number");
    }
  }
  return out;
}

void apply_sweep_value(ExperimentConfig& c, const std::string& param, double v) {
  const auto as_int = [&] {
    if (v != std::floor(v)) throw ConfigError("--param " + param + " needs integer values");
    return static_cast<int>(v);
  };
  if (param == "degree") {
    if (c.algorithm == Algorithm::proper) c.proper.degree = as_int();
    if (c.algorithm == Algorithm::relu) c.relu.degree = as_int();
    if (c.algorithm == Algorithm::ptas) c.ptas.inner_degree = as_int();
  } else if (param == "noise") {
    NoiseSpec noise;
    noise.model = v > 0.0 ? NoiseSpec::Model::rcn : NoiseSpec::Model::clean;
    noise.rate = v;
    c.data.noise = noise;
  } else if (param == "eps") {
    c.proper.eps = v;
    c.relu.eps = v;
    c.ptas.eps = v;
  } else if (param == "eta") {
    c.proper.eta = v;
    c.relu.eta = v;
    c.ptas.inner_eta = v;
  } else if (param == "gamma") {
    c.ptas.gamma = v;
  } else if (param == "n") {
    c.data.n = static_cast<std::size_t>(as_int());
  } else if (param == "d") {
    c.data.d = as_int();
  } else {
    throw ConfigError("--param must be one of degree, noise, eps, eta, gamma, n, d");
  }
}

std::string csv_number(const Json& v) {
  if (v.is_null()) return "";
  if (v.is_number_float()) return format_double(v.get<double>());
  return v.dump();
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Agnostic learning of halfspaces and ReLUs under Gaussian marginals", "agnostic"};
  app.require_subcommand(1);
  unsigned threads = 0;
  app.add_option("--threads", threads, "worker threads (default: hardware concurrency)");

  // generate
  CLI::App* gen = app.add_subcommand("generate", "write a planted dataset CSV");
  Flags gen_flags(gen);
  add_data_flags(gen_flags);
  std::string gen_kind = "halfspace";
  gen->add_option("--kind", gen_kind, "halfspace or relu");
  std::string gen_out;
  gen->add_option("--out", gen_out, "output CSV");

  struct Learner {
    Algorithm algorithm;
    CLI::App* app;
    std::unique_ptr<Flags> flags;
    std::string config;
    std::string out;
  };
  std::vector<Learner> learners;
  for (Algorithm a : {Algorithm::proper, Algorithm::ptas, Algorithm::relu}) {
    const char* help = a == Algorithm::proper ? "proper agnostic halfspace learner"
                       : a == Algorithm::ptas ? "localized (1 + gamma) OPT + eps halfspace learner"
                                              : "proper agnostic ReLU regression";
    CLI::App* sub = app.add_subcommand(std::string(command_name(a)), help);
    learners.push_back(Learner{a, sub, std::make_unique<Flags>(sub), "", ""});
  }
  for (Learner& l : learners) {
    add_data_flags(*l.flags);
    if (l.algorithm == Algorithm::proper) add_proper_flags(*l.flags);
    if (l.algorithm == Algorithm::ptas) add_ptas_flags(*l.flags);
    if (l.algorithm == Algorithm::relu) add_relu_flags(*l.flags);
    l.app->add_option("--config", l.config, "experiment config JSON");
    l.app->add_option("--out", l.out, "report JSON");
  }

  // verify
  CLI::App* verify = app.add_subcommand("verify", "run an invariant suite");
  std::string suite = "all";
  unsigned long long verify_seed = 1;
  std::string verify_out;
  verify->add_option("--suite", suite, "hermite, regression, influence, cover, localization, relu, datasets, all");
  verify->add_option("--seed", verify_seed, "random seed");
  verify->add_option("--out", verify_out, "optional JSON with every check");

  // sweep
  CLI::App* sweep = app.add_subcommand("sweep", "grid of runs aggregated into one CSV");
  std::string sweep_algorithm = "learn-halfspace";
  std::string sweep_param = "degree";
  std::string sweep_values;
  std::size_t sweep_seeds = 1;
  std::size_t sweep_cap = 1000;
  std::string sweep_out;
  sweep->add_option("--algorithm", sweep_algorithm, "learn-halfspace, ptas or learn-relu");
  sweep->add_option("--param", sweep_param, "degree, noise, eps, eta, gamma, n or d");
  sweep->add_option("--values", sweep_values, "comma-separated parameter values")->required();
  sweep->add_option("--seeds", sweep_seeds, "seeds per value (seed, seed + 1, ...)");
  sweep->add_option("--max-runs", sweep_cap, "refuse grids with more runs");
  sweep->add_option("--out", sweep_out, "output CSV");
  Flags sweep_flags(sweep);
  add_data_flags(sweep_flags);
  sweep_flags.add<double>("--eps", "accuracy", [](ExperimentConfig& c, double v) {
    c.proper.eps = v;
    c.relu.eps = v;
    c.ptas.eps = v;
  });
  sweep_flags.add<int>("--degree", "regression degree", [](ExperimentConfig& c, int v) {
    c.proper.degree = v;
    c.relu.degree = v;
    c.ptas.inner_degree = v;
  });
  sweep_flags.add<double>("--eta", "influence threshold", [](ExperimentConfig& c, double v) {
    c.proper.eta = v;
    c.relu.eta = v;
    c.ptas.inner_eta = v;
  });
  sweep_flags.add<double>("--gamma", "ptas slack", [](ExperimentConfig& c, double v) { c.ptas.gamma = v; });

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  if (!reversed.empty()) reversed.pop_back();
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kExitOk;
    }
    err << "error: " << e.what() << "\n";
    return kExitError;
  }

  try {
    if (threads > 0) set_worker_threads(threads);

    if (gen->parsed()) {
      ExperimentConfig c;
      c.data.kind = parse_label_mode(gen_kind);
      c.algorithm = c.data.kind == LabelMode::relu ? Algorithm::relu : Algorithm::proper;
      gen_flags.apply(c);
      if (!c.data.path.empty()) throw ConfigError("generate does not take --data");
      c.validate();
      const GeneratedBatch g = generate_dataset(c.data);
      const std::string path = output_path(gen_out, "data.csv");
      std::ostringstream csv;
      write_csv(g.batch, csv);
      write_text(path, csv.str());
      out << "generate: wrote " << g.batch.size() << " rows (d=" << g.batch.dimension()
          << ", corrupted=" << g.n_corrupted << ") to " << path << "\n";
      return kExitOk;
    }

    for (Learner& l : learners) {
      if (!l.app->parsed()) continue;
      ExperimentConfig c = load_config(l.config, l.algorithm);
      if (l.algorithm == Algorithm::relu) c.data.kind = LabelMode::relu;
      l.flags->apply(c);
      const ExperimentOutcome outcome = run_experiment(c);
      const std::string path = output_path(l.out, std::string(command_name(l.algorithm)) + ".json");
      write_text(path, serialize(outcome.report));
      out << outcome.summary << " -> " << path << "\n";
      return outcome.validation_flagged ? kExitFlagged : kExitOk;
    }

    if (verify->parsed()) {
      const std::vector<Check> checks = run_suite(suite, verify_seed);
      bool all = true;
      Json j = Json::array();
      for (const Check& ch : checks) {
        out << (ch.pass ? "PASS " : "FAIL ") << ch.suite << "/" << ch.name << "  " << ch.detail << "\n";
        all = all && ch.pass;
        j.push_back(Json{{"suite", ch.suite}, {"name", ch.name}, {"pass", ch.pass}, {"detail", ch.detail}});
      }
      if (!verify_out.empty()) write_text(verify_out, j.dump(2) + "\n");
      out << "verify " << suite << ": " << (all ? "all checks passed" : "some checks failed") << "\n";
      return all ? kExitOk : kExitFlagged;
    }

    if (sweep->parsed()) {
      ExperimentConfig base;
      base.algorithm = parse_algorithm(sweep_algorithm);
      if (base.algorithm == Algorithm::relu) base.data.kind = LabelMode::relu;
      sweep_flags.apply(base);
      const std::vector<double> values = parse_values(sweep_values);
      if (sweep_seeds == 0) throw ConfigError("--seeds must be >= 1");
      const std::size_t runs = values.size() * sweep_seeds;
      if (runs > sweep_cap) {
        throw ResourceError("sweep has " + std::to_string(runs) + " runs, above --max-runs " + std::to_string(sweep_cap));
      }
      std::vector<ExperimentConfig> configs;
      for (double v : values) {
        for (std::size_t s = 0; s < sweep_seeds; ++s) {
          ExperimentConfig c = base;
          apply_sweep_value(c, sweep_param, v);
          c.data.seed = base.data.seed + s;
          c.validate();
          configs.push_back(c);
        }
      }
      std::vector<ExperimentOutcome> outcomes(configs.size());
      parallel_for(configs.size(), [&](std::size_t i) { outcomes[i] = run_experiment(configs[i]); });

      std::ostringstream csv;
      csv << "algorithm,param,value,seed,holdout_metric,test_metric,population_opt,subspace_rank,grid_size,flags\n";
      for (std::size_t i = 0; i < configs.size(); ++i) {
        const Json& m = outcomes[i].report.metrics;
        Json holdout = nullptr;
        Json rank = nullptr;
        Json grid = nullptr;
        if (configs[i].algorithm == Algorithm::proper) {
          holdout = m["holdout_error"];
          rank = m["subspace_rank"];
          grid = m["grid_size"];
        } else if (configs[i].algorithm == Algorithm::relu) {
          holdout = m["holdout_loss"];
          rank = m["subspace_rank"];
          grid = m["grid_size"];
        } else {
          holdout = m["final_error"];
          if (!m["inner"].is_null()) {
            rank = m["inner"]["subspace_rank"];
            grid = m["inner"]["grid_size"];
          }
        }
        Json opt = nullptr;
        if (m["data"].contains("population_opt")) opt = m["data"]["population_opt"]["value"];
        std::string flags;
        for (const std::string& f : outcomes[i].report.flags) flags += (flags.empty() ? "" : ";") + f;
        csv << command_name(configs[i].algorithm) << "," << sweep_param << "," << format_double(values[i / sweep_seeds])
            << "," << configs[i].data.seed << "," << csv_number(holdout) << ","
            << (outcomes[i].test_metric ? format_double(*outcomes[i].test_metric) : "") << "," << csv_number(opt)
            << "," << csv_number(rank) << "," << csv_number(grid) << "," << flags << "\n";
      }
      const std::string path = output_path(sweep_out, "sweep.csv");
      write_text(path, csv.str());
      out << "sweep: " << configs.size() << " runs -> " << path << "\n";
      return kExitOk;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}

}  // namespace agnostic::cli
