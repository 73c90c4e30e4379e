#include "vie/fit.hpp"

#include <algorithm>
#include <cmath>

namespace vie {

FitResult fit_case(const CaseDefinition& c, const MeasurementSet& data, const FitOptions& options,
                   std::uint64_t seed) {
  MlpConfig net = options.network;
  net.init_seed = seed;
  const ParameterSet start = init_parameters(net);
  const LossEvaluator evaluator(c, data, net, options.loss);

  struct Cache {
    std::vector<double> x;
    ComponentEvaluation components;
  } cache;
  auto components_at = [&](std::span<const double> x) -> const ComponentEvaluation& {
    if (!std::equal(x.begin(), x.end(), cache.x.begin(), cache.x.end())) {
      cache.components = options.parallel ? evaluator.evaluate(x) : evaluator.evaluate_serial(x);
      cache.x.assign(x.begin(), x.end());
    }
    return cache.components;
  };

  const auto x0 = start.flatten();
  const auto& first = components_at(x0);
  WeightState weights = adaptive_weights(first.values.mse_g, first.values.mse_o, options.loss);

  FitResult result;
  result.seed = seed;
  result.theta_initial = start.theta;

  const Objective objective = [&](std::span<const double> x) {
    const auto& comps = components_at(x);
    Evaluation e;
    e.gradient.resize(x.size());
    e.value = comps.combine(weights, e.gradient);
    return e;
  };

  const IterationHook hook = [&](const StepInfo&, std::span<const double> x, Evaluation& current) {
    const auto& comps = components_at(x);
    LossBreakdown b = comps.values;
    b.weights = weights;
    b.total = weighted_total(b);
    result.history.push_back(b);
    result.theta_history.push_back(x.back());

    weights = adaptive_weights(b.mse_g, b.mse_o, options.loss);
    current.value = comps.combine(weights, current.gradient);
    return true;
  };

  auto run = minimize(objective, x0, options.optimizer, hook);
  result.params = ParameterSet::unflatten(run.x, net);
  result.theta_hat = result.params.theta;
  result.iterations = run.iterations;
  result.evaluations = run.evaluations;
  result.reason = run.reason;
  result.steps = std::move(run.steps);
  return result;
}

FitSummary summarize_fit(const FitResult& fit, const MeasurementSet& data, double theta_true,
                         double lambda) {
  FitSummary s;
  s.lambda = lambda;
  s.theta_true = theta_true;
  s.theta_pred = fit.theta_hat;
  s.relative_error = (fit.theta_hat - theta_true) / theta_true;
  for (std::size_t i = 0; i < data.size(); ++i) {
    s.abs_error_sum += std::abs(forward_value(fit.params, data.times[i]).u - data.values[i]);
  }
  s.abs_error_mean = s.abs_error_sum / static_cast<double>(data.size());
  return s;
}

}  // namespace vie
