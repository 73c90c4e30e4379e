#pragma once

#include <cstdint>
#include <vector>

#include "vie/cases.hpp"
#include "vie/lbfgs.hpp"
#include "vie/loss.hpp"
#include "vie/network.hpp"

namespace vie {

struct FitOptions {
  MlpConfig network;
  OptimizerConfig optimizer;
  LossOptions loss;
  /// Per-point parallel loss evaluation; false uses the single-graph path.
  bool parallel = true;
};

struct FitResult {
  ParameterSet params;
  double theta_hat = 0.0;
  double theta_initial = 0.0;
  /// One entry per accepted step: components at the new point, weighted by
  /// the weights that step's line search used.
  std::vector<LossBreakdown> history;
  std::vector<double> theta_history;
  /// Objective before and after each accepted step, under that step's weights.
  std::vector<StepInfo> steps;
  int iterations = 0;
  int evaluations = 0;
  Termination reason = Termination::max_iterations;
  std::uint64_t seed = 0;
};

/// Trains the network and theta on `data`. Adaptive weights are refreshed
/// after every accepted step and held fixed within each line search.
FitResult fit_case(const CaseDefinition& c, const MeasurementSet& data, const FitOptions& options,
                   std::uint64_t seed);

/// Per-lambda accuracy row for summary tables.
struct FitSummary {
  double lambda = 0.0;
  double theta_true = 1.0;
  double theta_pred = 0.0;
  double relative_error = 0.0;  // (theta_pred - theta_true) / theta_true
  double abs_error_sum = 0.0;   // sum over measurement points of |u_pred - u_m|
  double abs_error_mean = 0.0;
};

FitSummary summarize_fit(const FitResult& fit, const MeasurementSet& data, double theta_true,
                         double lambda);

}  // namespace vie
