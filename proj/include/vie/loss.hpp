#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "vie/autodiff.hpp"
#include "vie/cases.hpp"
#include "vie/network.hpp"
#include "vie/simulator.hpp"

namespace vie {

/// Measured u at strictly increasing times. The same times serve as
/// collocation points for the residual terms.
struct MeasurementSet {
  std::vector<double> times;
  std::vector<double> values;

  static MeasurementSet from_samples(std::span<const Sample> samples);
  std::size_t size() const noexcept { return times.size(); }
  void validate() const;
};

struct LossOptions {
  /// Fixed weight for the initial-condition term. Unset: w_i follows w_o.
  std::optional<double> initial_weight;
  /// Also penalize v'(t_ic)^2 (implied by the case 1 kernel; off by default).
  bool enforce_initial_slope = false;
};

struct WeightState {
  double w_m = 1.0;
  double w_g = 1.0;
  double w_i = 1.0;
  double w_o = 1.0;
  bool clamped = false;
};

/// [w_m, w_g, w_o] = [1, mse_g / min, mse_o / min]. Inputs at or below 1e-30
/// clamp the denominator and cap each weight at 1e6.
WeightState adaptive_weights(double mse_g, double mse_o, const LossOptions& options = {});

struct LossBreakdown {
  double mse_m = 0.0;
  double mse_g = 0.0;
  double mse_o = 0.0;
  double mse_i = 0.0;
  WeightState weights;
  double total = 0.0;
};

double weighted_total(const LossBreakdown& b) noexcept;

/// Source of (u, v) expressions for an input node. `input_slot` is the
/// variable slot used for t; it must lie outside the parameter slots.
struct Approximator {
  std::function<NetworkOutput(ad::Expr t)> outputs;
  std::size_t input_slot = 0;
};

Approximator network_approximator(const MlpConfig& config, const BoundParameters& bound);

ad::Expr mse_measurement(ad::Graph& graph, const Approximator& net, const MeasurementSet& data);

/// Mean of |u - (f + sign * theta * v)|^2; the zero-mean noise term is dropped.
ad::Expr mse_governing(ad::Graph& graph, const Approximator& net, ad::Expr theta,
                       const CaseDefinition& c, std::span<const double> times);

/// Case 1: v'' - u. Case 2: v' - e^{2t} u - v. Case 3: t v' - t^3 u - v.
/// Generic: v' - k(t,t) u - Q(t), Q a left-Riemann sum over the collocation
/// times of dk/dt(t, s) u(s).
ad::Expr mse_output_condition(ad::Graph& graph, const Approximator& net, const CaseDefinition& c,
                              std::span<const double> times);

/// |v(t_ic)|^2, plus |v'(t_ic)|^2 when enforce_initial_slope is set.
ad::Expr mse_initial(ad::Graph& graph, const Approximator& net, const CaseDefinition& c,
                     const LossOptions& options = {});

struct LossTerms {
  ad::Expr mse_m;
  ad::Expr mse_g;
  ad::Expr mse_o;
  ad::Expr mse_i;
};

struct TotalLoss {
  ad::Expr total;
  LossTerms terms;
  LossBreakdown breakdown;
};

/// Weighted sum with `weights` held constant.
TotalLoss total_loss(ad::Graph& graph, const Approximator& net, ad::Expr theta,
                     const CaseDefinition& c, const MeasurementSet& data,
                     const WeightState& weights, const LossOptions& options = {});

/// Values and parameter gradients of the four unweighted loss components.
/// Any weighting is a linear combination of these.
struct ComponentEvaluation {
  LossBreakdown values;
  std::vector<double> grad_m;
  std::vector<double> grad_g;
  std::vector<double> grad_o;
  std::vector<double> grad_i;

  /// Weighted total; writes the matching gradient into `gradient`.
  double combine(const WeightState& w, std::span<double> gradient) const;
};

/// Loss components of the network approximator at a flattened parameter
/// vector.
class LossEvaluator {
 public:
  LossEvaluator(CaseDefinition c, MeasurementSet data, MlpConfig config, LossOptions options = {});

  /// One small graph per collocation point, built in parallel and reduced in
  /// point order. Generic output mode couples the points and goes through
  /// evaluate_serial.
  ComponentEvaluation evaluate(std::span<const double> flat) const;

  /// Reference path: the whole loss as one graph.
  ComponentEvaluation evaluate_serial(std::span<const double> flat) const;

  std::size_t parameter_count() const noexcept { return n_params_; }
  const CaseDefinition& case_definition() const noexcept { return case_; }
  const MeasurementSet& data() const noexcept { return data_; }
  const MlpConfig& network() const noexcept { return config_; }
  const LossOptions& options() const noexcept { return options_; }

 private:
  CaseDefinition case_;
  MeasurementSet data_;
  MlpConfig config_;
  LossOptions options_;
  std::size_t n_params_;
  std::vector<double> forcing_;
};

}  // namespace vie
