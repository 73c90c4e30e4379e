#include "vie/experiment.hpp"

#include <cmath>
#include <set>

#include "vie/io.hpp"

namespace vie {

void ExperimentConfig::validate() const {
  if (case_name == CaseName::generic) throw ConfigError("case must be case1, case2 or case3");
  for (const double l : lambdas) {
    if (!(l >= 0.0) || !std::isfinite(l)) throw ConfigError("lambda values must be finite and >= 0");
  }
  if (n == 0 || n_paths == 0 || n_measurements < 2 || truth_paths == 0 || truth_steps == 0 ||
      predict.n_paths == 0 || predict.n_steps == 0) {
    throw ConfigError("counts must be positive (and n_measurements >= 2)");
  }
  if (n_measurements > n + 1) throw ConfigError("n_measurements must not exceed n + 1");
  if (!(horizon_end > horizon_start)) throw ConfigError("horizon end must exceed horizon start");
  if (!(predict.level > 0.0 && predict.level < 1.0)) throw ConfigError("level must be in (0, 1)");
  try {
    fit.network.validate();
    fit.optimizer.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

std::vector<double> ExperimentConfig::lambda_list() const {
  return lambdas.empty() ? make_case(case_name).default_lambdas : lambdas;
}

ExperimentConfig default_config(CaseName name) {
  ExperimentConfig c;
  c.case_name = name;
  if (name == CaseName::case1) {
    c.horizon_start = 3.0;
    c.horizon_end = 4.0;
  } else {
    c.horizon_start = 0.5;
    c.horizon_end = 1.0;
  }
  return c;
}

namespace {

template <class T>
void take(const nlohmann::json& j, const char* key, T& into, std::set<std::string>& seen) {
  if (!j.contains(key)) return;
  seen.insert(key);
  try {
    into = j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
  }
}

void reject_unknown(const nlohmann::json& j, const std::set<std::string>& seen,
                    const std::string& where) {
  for (const auto& item : j.items()) {
    if (!seen.count(item.key())) throw ConfigError("unknown key '" + where + item.key() + "'");
  }
}

}  // namespace

ExperimentConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  std::string case_name = "case1";
  std::set<std::string> seen;
  take(j, "case", case_name, seen);
  ExperimentConfig c;
  try {
    c = default_config(case_name_from_string(case_name));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  take(j, "lambdas", c.lambdas, seen);
  take(j, "n", c.n, seen);
  take(j, "n_paths", c.n_paths, seen);
  take(j, "n_measurements", c.n_measurements, seen);
  take(j, "seed", c.seed, seen);
  std::string out = c.out.string();
  take(j, "out", out, seen);
  c.out = out;

  if (j.contains("network")) {
    seen.insert("network");
    const auto& n = j.at("network");
    std::set<std::string> s;
    take(n, "widths", c.fit.network.widths, s);
    reject_unknown(n, s, "network.");
  }
  if (j.contains("optimizer")) {
    seen.insert("optimizer");
    const auto& o = j.at("optimizer");
    auto& opt = c.fit.optimizer;
    std::set<std::string> s;
    take(o, "max_iterations", opt.max_iterations, s);
    take(o, "learning_rate", opt.learning_rate, s);
    take(o, "history_size", opt.history_size, s);
    take(o, "c1", opt.c1, s);
    take(o, "c2", opt.c2, s);
    take(o, "max_line_search_trials", opt.max_line_search_trials, s);
    take(o, "gradient_tolerance", opt.gradient_tolerance, s);
    take(o, "roundoff_tolerance", opt.roundoff_tolerance, s);
    reject_unknown(o, s, "optimizer.");
  }
  if (j.contains("loss")) {
    seen.insert("loss");
    const auto& l = j.at("loss");
    std::set<std::string> s;
    if (l.contains("initial_weight")) {
      s.insert("initial_weight");
      if (!l.at("initial_weight").is_null()) {
        double w = 0.0;
        take(l, "initial_weight", w, s);
        c.fit.loss.initial_weight = w;
      }
    }
    take(l, "enforce_initial_slope", c.fit.loss.enforce_initial_slope, s);
    take(l, "parallel", c.fit.parallel, s);
    reject_unknown(l, s, "loss.");
  }
  if (j.contains("predict")) {
    seen.insert("predict");
    const auto& p = j.at("predict");
    std::set<std::string> s;
    std::vector<double> horizon{c.horizon_start, c.horizon_end};
    take(p, "horizon", horizon, s);
    if (horizon.size() != 2) throw ConfigError("predict.horizon must be [start, end]");
    c.horizon_start = horizon[0];
    c.horizon_end = horizon[1];
    take(p, "n_paths", c.predict.n_paths, s);
    take(p, "n_steps", c.predict.n_steps, s);
    take(p, "level", c.predict.level, s);
    take(p, "truth_paths", c.truth_paths, s);
    take(p, "truth_steps", c.truth_steps, s);
    reject_unknown(p, s, "predict.");
  }
  reject_unknown(j, seen, "");
  c.validate();
  return c;
}

nlohmann::json to_json(const ExperimentConfig& c) {
  nlohmann::json loss = {{"enforce_initial_slope", c.fit.loss.enforce_initial_slope},
                         {"parallel", c.fit.parallel}};
  loss["initial_weight"] = c.fit.loss.initial_weight ? nlohmann::json(*c.fit.loss.initial_weight)
                                                     : nlohmann::json(nullptr);
  const auto& o = c.fit.optimizer;
  return {{"case", to_string(c.case_name)},
          {"lambdas", c.lambda_list()},
          {"n", c.n},
          {"n_paths", c.n_paths},
          {"n_measurements", c.n_measurements},
          {"seed", c.seed},
          {"out", c.out.string()},
          {"network", {{"widths", c.fit.network.widths}}},
          {"optimizer",
           {{"max_iterations", o.max_iterations},
            {"learning_rate", o.learning_rate},
            {"history_size", o.history_size},
            {"c1", o.c1},
            {"c2", o.c2},
            {"max_line_search_trials", o.max_line_search_trials},
            {"gradient_tolerance", o.gradient_tolerance},
            {"roundoff_tolerance", o.roundoff_tolerance}}},
          {"loss", loss},
          {"predict",
           {{"horizon", {c.horizon_start, c.horizon_end}},
            {"n_paths", c.predict.n_paths},
            {"n_steps", c.predict.n_steps},
            {"level", c.predict.level},
            {"truth_paths", c.truth_paths},
            {"truth_steps", c.truth_steps}}}};
}

Ensemble simulate_fit_ensemble(const CaseDefinition& c, double lambda,
                               const ExperimentConfig& config) {
  const auto grid = make_grid(c.t0, c.t_end, config.n);
  return simulate_ensemble(c.problem(c.true_theta, lambda, grid), config.n_paths,
                           config.seed + kFitStream);
}

MeasurementSet measurements_from(const Ensemble& ensemble, std::size_t count) {
  return MeasurementSet::from_samples(subsample_measurements(ensemble.mean, count));
}

std::string lambda_dir(double lambda) { return "lambda_" + io::format_double(lambda); }

}  // namespace vie
