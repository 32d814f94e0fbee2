#include "agnostic/report.hpp"

#include <set>
#include <string>

#include "agnostic/errors.hpp"

namespace agnostic {
namespace {

// Reads j[key] into `out` when present; type mismatches become ConfigError.
class FieldReader {
 public:
  FieldReader(const Json& j, std::string context) : j_(j), context_(std::move(context)) {
    if (!j_.is_object()) throw ConfigError(context_ + " must be a JSON object");
  }

  template <class T>
  void operator()(const char* key, T& out) {
    seen_.insert(key);
    const auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      out = it->template get<T>();
    } catch (const Json::exception&) {
      throw ConfigError(context_ + "." + key + " has the wrong type");
    }
  }

  template <class T>
  void operator()(const char* key, std::optional<T>& out) {
    seen_.insert(key);
    const auto it = j_.find(key);
    if (it == j_.end()) return;
    if (it->is_null()) {
      out.reset();
      return;
    }
    try {
      out = it->template get<T>();
    } catch (const Json::exception&) {
      throw ConfigError(context_ + "." + key + " has the wrong type");
    }
  }

  void finish() const {
    for (const auto& item : j_.items()) {
      if (!seen_.count(item.key())) throw ConfigError("unknown field " + context_ + "." + item.key());
    }
  }

 private:
  const Json& j_;
  std::string context_;
  std::set<std::string> seen_;
};

template <class T>
Json optional_json(const std::optional<T>& v) {
  return v ? Json(*v) : Json(nullptr);
}

Json subspace_json(const Subspace& s) {
  Json basis = Json::array();
  for (Eigen::Index r = 0; r < s.basis.rows(); ++r) basis.push_back(to_json(Eigen::VectorXd(s.basis.row(r).transpose())));
  return Json{{"rank", s.rank()}, {"threshold", s.threshold}, {"eigenvalues", to_json(s.eigenvalues)}, {"basis", basis}};
}

}  // namespace

Json to_json(const Eigen::VectorXd& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

Json to_json(const HalfspaceHypothesis& h) {
  if (h.is_constant()) return Json{{"constant", h.constant}};
  return Json{{"w", to_json(h.w)}, {"t", h.t}};
}

Json to_json(const ReluHypothesis& h) { return Json{{"v", to_json(h.v)}, {"a", h.a}, {"t", h.t}}; }

Json to_json(const Timings& timings) {
  Json out = Json::array();
  for (const auto& [stage, seconds] : timings.stages) out.push_back(Json{{"stage", stage}, {"seconds", seconds}});
  return out;
}

Json to_json(const ProperLearnerConfig& c) {
  return Json{{"eps", c.eps},
              {"delta", c.delta},
              {"degree", optional_json(c.degree)},
              {"eta", optional_json(c.eta)},
              {"degree_constant", c.degree_constant},
              {"eta_divisor", c.eta_divisor},
              {"n_regression", c.n_regression},
              {"n_holdout", c.n_holdout},
              {"holdout_constant", c.holdout_constant},
              {"repeats", c.repeats},
              {"validation_fraction", c.validation_fraction},
              {"ridge_per_sample", c.ridge_per_sample},
              {"feature_cap", c.feature_cap},
              {"enumeration_cap", c.enumeration_cap},
              {"samples_per_feature", c.samples_per_feature},
              {"brute_force", c.brute_force}};
}

ProperLearnerConfig proper_config_from_json(const Json& j) {
  ProperLearnerConfig c;
  FieldReader read(j, "config");
  read("eps", c.eps);
  read("delta", c.delta);
  read("degree", c.degree);
  read("eta", c.eta);
  read("degree_constant", c.degree_constant);
  read("eta_divisor", c.eta_divisor);
  read("n_regression", c.n_regression);
  read("n_holdout", c.n_holdout);
  read("holdout_constant", c.holdout_constant);
  read("repeats", c.repeats);
  read("validation_fraction", c.validation_fraction);
  read("ridge_per_sample", c.ridge_per_sample);
  read("feature_cap", c.feature_cap);
  read("enumeration_cap", c.enumeration_cap);
  read("samples_per_feature", c.samples_per_feature);
  read("brute_force", c.brute_force);
  read.finish();
  c.validate();
  return c;
}

Json to_json(const PtasConfig& c) {
  return Json{{"gamma", c.gamma},
              {"eps", c.eps},
              {"delta", c.delta},
              {"early_exit_constant", c.early_exit_constant},
              {"sigma_constant", c.sigma_constant},
              {"alpha_divisor", c.alpha_divisor},
              {"kappa", c.kappa},
              {"sigma_floor", c.sigma_floor},
              {"n_init", c.n_init},
              {"n_estimate", c.n_estimate},
              {"n_pool", c.n_pool},
              {"inner_eps", optional_json(c.inner_eps)},
              {"inner_degree", c.inner_degree},
              {"inner_eta", c.inner_eta},
              {"inner_regression_fraction", c.inner_regression_fraction},
              {"seed", c.seed}};
}

PtasConfig ptas_config_from_json(const Json& j) {
  PtasConfig c;
  FieldReader read(j, "config");
  read("gamma", c.gamma);
  read("eps", c.eps);
  read("delta", c.delta);
  read("early_exit_constant", c.early_exit_constant);
  read("sigma_constant", c.sigma_constant);
  read("alpha_divisor", c.alpha_divisor);
  read("kappa", c.kappa);
  read("sigma_floor", c.sigma_floor);
  read("n_init", c.n_init);
  read("n_estimate", c.n_estimate);
  read("n_pool", c.n_pool);
  read("inner_eps", c.inner_eps);
  read("inner_degree", c.inner_degree);
  read("inner_eta", c.inner_eta);
  read("inner_regression_fraction", c.inner_regression_fraction);
  read("seed", c.seed);
  read.finish();
  c.validate();
  return c;
}

Json to_json(const ReluLearnerConfig& c) {
  return Json{{"eps", c.eps},
              {"delta", c.delta},
              {"degree", optional_json(c.degree)},
              {"eta", optional_json(c.eta)},
              {"degree_constant", c.degree_constant},
              {"eta_divisor", c.eta_divisor},
              {"n_regression", c.n_regression},
              {"n_holdout", c.n_holdout},
              {"holdout_constant", c.holdout_constant},
              {"ridge_per_sample", c.ridge_per_sample},
              {"scale_constant", c.scale_constant},
              {"bias_negative", c.bias_negative},
              {"bias_positive", c.bias_positive},
              {"feature_cap", c.feature_cap},
              {"enumeration_cap", c.enumeration_cap},
              {"samples_per_feature", c.samples_per_feature}};
}

ReluLearnerConfig relu_config_from_json(const Json& j) {
  ReluLearnerConfig c;
  FieldReader read(j, "config");
  read("eps", c.eps);
  read("delta", c.delta);
  read("degree", c.degree);
  read("eta", c.eta);
  read("degree_constant", c.degree_constant);
  read("eta_divisor", c.eta_divisor);
  read("n_regression", c.n_regression);
  read("n_holdout", c.n_holdout);
  read("holdout_constant", c.holdout_constant);
  read("ridge_per_sample", c.ridge_per_sample);
  read("scale_constant", c.scale_constant);
  read("bias_negative", c.bias_negative);
  read("bias_positive", c.bias_positive);
  read("feature_cap", c.feature_cap);
  read("enumeration_cap", c.enumeration_cap);
  read("samples_per_feature", c.samples_per_feature);
  read.finish();
  c.validate();
  return c;
}

Json metrics_json(const ProperRunResult& r) {
  return Json{{"hypothesis", to_json(r.hypothesis)},
              {"holdout_error", r.holdout_error},
              {"best_constant_error", r.best_constant_error},
              {"degree_used", r.degree_used},
              {"degree_theoretical", r.degree_theoretical},
              {"degree_capped", r.degree_capped},
              {"eta_used", r.eta_used},
              {"n_regression", r.n_regression},
              {"n_holdout", r.n_holdout},
              {"n_features", r.n_features},
              {"regression_train_loss", r.regression_train_loss},
              {"regression_validation_loss", r.regression_validation_loss},
              {"fold_validation_losses", r.fold_validation_losses},
              {"poly_norm_sq", r.poly_norm_sq},
              {"influence_trace", r.influence_trace},
              {"spectrum", r.spectrum},
              {"subspace", subspace_json(r.subspace)},
              {"subspace_rank", r.subspace.rank()},
              {"cover_size", r.cover_size},
              {"threshold_count", r.threshold_count},
              {"grid_size", r.grid_size},
              {"brute_force", r.brute_force},
              {"brute_force_case", r.brute_force_case}};
}

Json metrics_json(const PtasRunResult& r) {
  Json out{{"hypothesis", to_json(r.hypothesis)},
           {"initial", to_json(r.initial)},
           {"init_empirical_error", r.init.empirical_error},
           {"chow_norm", r.init.chow_norm},
           {"init_degenerate", r.init.degenerate},
           {"opt_hat", r.opt_hat},
           {"initial_error", r.initial_error},
           {"final_error", r.final_error},
           {"early_exit", r.early_exit},
           {"sigma_raw", r.sigma_raw},
           {"acceptance", Json{{"offered", r.acceptance.n_offered},
                               {"accepted", r.acceptance.n_accepted},
                               {"rate", r.acceptance.rate()}}},
           {"fell_back", r.fell_back}};
  out["localization"] = r.localization ? Json{{"w0", to_json(r.localization->w0)},
                                              {"sigma", r.localization->sigma},
                                              {"gamma", r.localization->gamma},
                                              {"alpha", r.localization->alpha}}
                                       : Json(nullptr);
  out["inner"] = r.inner ? metrics_json(*r.inner) : Json(nullptr);
  out["candidate"] = r.candidate ? to_json(*r.candidate) : Json(nullptr);
  out["validation"] = r.validation ? Json{{"pass", r.validation->pass},
                                          {"abs_t", r.validation->abs_t},
                                          {"angle", r.validation->angle},
                                          {"bound", r.validation->bound}}
                                   : Json(nullptr);
  return out;
}

Json metrics_json(const ReluRunResult& r) {
  return Json{{"hypothesis", to_json(r.hypothesis)},
              {"holdout_loss", r.holdout_loss},
              {"train_loss", r.train_loss},
              {"degree_used", r.degree_used},
              {"degree_theoretical", r.degree_theoretical},
              {"degree_capped", r.degree_capped},
              {"eta_used", r.eta_used},
              {"n_regression", r.n_regression},
              {"n_holdout", r.n_holdout},
              {"n_features", r.n_features},
              {"regression_train_loss", r.regression_train_loss},
              {"poly_norm_sq", r.poly_norm_sq},
              {"influence_trace", r.influence_trace},
              {"spectrum", r.spectrum},
              {"subspace", subspace_json(r.subspace)},
              {"subspace_rank", r.subspace.rank()},
              {"cover_size", r.cover_size},
              {"scale_count", r.scale_count},
              {"bias_count", r.bias_count},
              {"bias_step", r.bias_step},
              {"grid_size", r.grid_size},
              {"selected_index", r.selected_index}};
}

Json to_json(const RunReport& report) {
  return Json{{"schema_version", kReportSchemaVersion},
              {"command", report.command},
              {"config", report.config},
              {"metrics", report.metrics},
              {"flags", report.flags},
              {"runtime", Json{{"threads", report.threads}, {"timings", to_json(report.timings)}}}};
}

std::string serialize(const RunReport& report) { return to_json(report).dump(2) + "\n"; }

Json comparable_fields(const Json& report) {
  Json out = report;
  out.erase("runtime");
  return out;
}

}  // namespace agnostic
