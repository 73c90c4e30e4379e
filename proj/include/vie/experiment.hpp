#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "vie/cases.hpp"
#include "vie/fit.hpp"
#include "vie/loss.hpp"
#include "vie/prediction.hpp"
#include "vie/simulator.hpp"

namespace vie {

/// Invalid or inconsistent experiment configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
  CaseName case_name = CaseName::case1;
  std::vector<double> lambdas;  // empty: the case's default list
  std::size_t n = 1000;         // grid subintervals over the fitting domain
  std::size_t n_paths = 100;
  std::size_t n_measurements = 50;
  FitOptions fit;
  double horizon_start = 0.0;  // per-case values come from default_config
  double horizon_end = 0.0;
  PredictOptions predict;
  std::size_t truth_paths = 20;
  std::size_t truth_steps = 1000;
  std::uint64_t seed = 0;
  std::filesystem::path out = "runs";

  void validate() const;
  std::vector<double> lambda_list() const;
};

/// Case defaults: horizon [3, 4] for case 1 and [0.5, 1] otherwise.
ExperimentConfig default_config(CaseName name);

/// Reads the keys present in `j` over default_config(case). Unknown keys are
/// rejected so typos surface as errors.
ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ExperimentConfig& config);

/// Fitting ensemble for one lambda: n_paths members on the case domain.
Ensemble simulate_fit_ensemble(const CaseDefinition& c, double lambda,
                               const ExperimentConfig& config);

/// Evenly spaced samples of the ensemble mean.
MeasurementSet measurements_from(const Ensemble& ensemble, std::size_t count);

/// Directory name for one lambda, e.g. "lambda_0.1".
std::string lambda_dir(double lambda);

}  // namespace vie
