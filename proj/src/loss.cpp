#include "vie/loss.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <stdexcept>

namespace vie {

MeasurementSet MeasurementSet::from_samples(std::span<const Sample> samples) {
  MeasurementSet m;
  m.times.reserve(samples.size());
  m.values.reserve(samples.size());
  for (const auto& s : samples) {
    m.times.push_back(s.t);
    m.values.push_back(s.value);
  }
  m.validate();
  return m;
}

void MeasurementSet::validate() const {
  if (times.size() != values.size()) {
    throw std::invalid_argument("MeasurementSet: times and values differ in length");
  }
  if (times.size() < 2) {
    throw std::invalid_argument("MeasurementSet: need at least 2 points");
  }
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!std::isfinite(times[i]) || !std::isfinite(values[i])) {
      throw std::invalid_argument("MeasurementSet: non-finite entry at row " + std::to_string(i));
    }
    if (i > 0 && !(times[i] > times[i - 1])) {
      throw std::invalid_argument("MeasurementSet: times must be strictly increasing");
    }
  }
}

WeightState adaptive_weights(double mse_g, double mse_o, const LossOptions& options) {
  if (!(mse_g >= 0.0) || !(mse_o >= 0.0) || !std::isfinite(mse_g) || !std::isfinite(mse_o)) {
    throw std::invalid_argument("adaptive_weights: residual terms must be finite and non-negative");
  }
  constexpr double kFloor = 1e-30;
  constexpr double kCap = 1e6;
  WeightState w;
  const double lo = std::min(mse_g, mse_o);
  if (lo <= kFloor) {
    w.clamped = true;
    w.w_g = std::clamp(mse_g / kFloor, 1.0, kCap);
    w.w_o = std::clamp(mse_o / kFloor, 1.0, kCap);
  } else {
    w.w_g = mse_g / lo;
    w.w_o = mse_o / lo;
  }
  w.w_m = 1.0;
  w.w_i = options.initial_weight.value_or(w.w_o);
  return w;
}

double weighted_total(const LossBreakdown& b) noexcept {
  const auto& w = b.weights;
  return w.w_m * b.mse_m + w.w_g * b.mse_g + w.w_i * b.mse_i + w.w_o * b.mse_o;
}

Approximator network_approximator(const MlpConfig& config, const BoundParameters& bound) {
  return {[config, &bound](ad::Expr t) { return forward(config, bound, t); },
          config.parameter_count()};
}

namespace {

struct PointOutputs {
  double t = 0.0;
  ad::Expr input;
  NetworkOutput out;
};

std::vector<PointOutputs> build_points(ad::Graph& g, const Approximator& net,
                                       std::span<const double> times) {
  std::vector<PointOutputs> pts;
  pts.reserve(times.size());
  for (const double t : times) {
    const auto input = g.variable(net.input_slot, t);
    pts.push_back({t, input, net.outputs(input)});
  }
  return pts;
}

ad::Expr mean_square(ad::Graph& g, std::span<const ad::Expr> residuals) {
  if (residuals.empty()) throw std::invalid_argument("mean of zero residuals");
  ad::Expr acc = g.mul(residuals[0], residuals[0]);
  for (std::size_t i = 1; i < residuals.size(); ++i) {
    acc = g.add(acc, g.mul(residuals[i], residuals[i]));
  }
  return g.mul(acc, g.constant(1.0 / static_cast<double>(residuals.size())));
}

ad::Expr governing_residual(ad::Graph& g, const PointOutputs& p, ad::Expr theta, double forcing,
                            double sign) {
  // u - [f + sign * theta * v]
  const ad::Expr drift = g.mul(g.mul(g.constant(sign), theta), p.out.v);
  return g.sub(p.out.u, g.add(g.constant(forcing), drift));
}

ad::Expr closed_form_output_residual(ad::Graph& g, const CaseDefinition& c, const PointOutputs& p) {
  const double t = p.t;
  switch (c.id) {
    case CaseName::case1:
      return g.sub(g.derivative(p.out.v, p.input, 2), p.out.u);
    case CaseName::case2: {
      const ad::Expr dv = g.derivative(p.out.v, p.input, 1);
      return g.sub(g.sub(dv, g.mul(g.constant(std::exp(2.0 * t)), p.out.u)), p.out.v);
    }
    case CaseName::case3: {
      // t-scaled form of v' - t^2 u - v / t, regular at t = 0
      const ad::Expr dv = g.derivative(p.out.v, p.input, 1);
      return g.sub(g.sub(g.mul(g.constant(t), dv), g.mul(g.constant(t * t * t), p.out.u)),
                   p.out.v);
    }
    case CaseName::generic:
      break;
  }
  throw std::invalid_argument("closed-form output condition needs case1, case2 or case3");
}

std::vector<ad::Expr> generic_output_residuals(ad::Graph& g, const CaseDefinition& c,
                                               std::span<const PointOutputs> pts) {
  if (!c.kernel || !c.kernel_dt) {
    throw std::invalid_argument("generic output condition needs kernel and kernel_dt");
  }
  std::vector<ad::Expr> res;
  res.reserve(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double ti = pts[i].t;
    ad::Expr r = g.sub(g.derivative(pts[i].out.v, pts[i].input, 1),
                       g.mul(g.constant(c.kernel(ti, ti)), pts[i].out.u));
    for (std::size_t j = 0; j < i; ++j) {
      const double width = pts[j + 1].t - pts[j].t;
      r = g.sub(r, g.mul(g.constant(c.kernel_dt(ti, pts[j].t) * width), pts[j].out.u));
    }
    res.push_back(r);
  }
  return res;
}

std::vector<ad::Expr> output_residuals(ad::Graph& g, const CaseDefinition& c,
                                       std::span<const PointOutputs> pts) {
  if (c.output_mode == OutputMode::generic_quadrature || c.id == CaseName::generic) {
    return generic_output_residuals(g, c, pts);
  }
  std::vector<ad::Expr> res;
  res.reserve(pts.size());
  for (const auto& p : pts) res.push_back(closed_form_output_residual(g, c, p));
  return res;
}

ad::Expr measurement_term(ad::Graph& g, std::span<const PointOutputs> pts,
                          const MeasurementSet& data) {
  std::vector<ad::Expr> res;
  res.reserve(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    res.push_back(g.sub(pts[i].out.u, g.constant(data.values[i])));
  }
  return mean_square(g, res);
}

ad::Expr governing_term(ad::Graph& g, std::span<const PointOutputs> pts, ad::Expr theta,
                        const CaseDefinition& c) {
  std::vector<ad::Expr> res;
  res.reserve(pts.size());
  for (const auto& p : pts) {
    res.push_back(governing_residual(g, p, theta, c.forcing(p.t), c.drift_sign));
  }
  return mean_square(g, res);
}

}  // namespace

ad::Expr mse_measurement(ad::Graph& graph, const Approximator& net, const MeasurementSet& data) {
  data.validate();
  const auto pts = build_points(graph, net, data.times);
  return measurement_term(graph, pts, data);
}

ad::Expr mse_governing(ad::Graph& graph, const Approximator& net, ad::Expr theta,
                       const CaseDefinition& c, std::span<const double> times) {
  const auto pts = build_points(graph, net, times);
  return governing_term(graph, pts, theta, c);
}

ad::Expr mse_output_condition(ad::Graph& graph, const Approximator& net, const CaseDefinition& c,
                              std::span<const double> times) {
  const auto pts = build_points(graph, net, times);
  const auto res = output_residuals(graph, c, pts);
  return mean_square(graph, res);
}

ad::Expr mse_initial(ad::Graph& graph, const Approximator& net, const CaseDefinition& c,
                     const LossOptions& options) {
  const auto input = graph.variable(net.input_slot, c.t_ic);
  const auto out = net.outputs(input);
  ad::Expr term = graph.mul(out.v, out.v);
  if (options.enforce_initial_slope) {
    const auto dv = graph.derivative(out.v, input, 1);
    term = graph.add(term, graph.mul(dv, dv));
  }
  return term;
}

TotalLoss total_loss(ad::Graph& graph, const Approximator& net, ad::Expr theta,
                     const CaseDefinition& c, const MeasurementSet& data,
                     const WeightState& weights, const LossOptions& options) {
  data.validate();
  const auto pts = build_points(graph, net, data.times);
  TotalLoss out;
  out.terms.mse_m = measurement_term(graph, pts, data);
  out.terms.mse_g = governing_term(graph, pts, theta, c);
  out.terms.mse_o = mean_square(graph, output_residuals(graph, c, pts));
  out.terms.mse_i = mse_initial(graph, net, c, options);

  auto& g = graph;
  out.total = g.add(
      g.add(g.mul(g.constant(weights.w_m), out.terms.mse_m),
            g.mul(g.constant(weights.w_g), out.terms.mse_g)),
      g.add(g.mul(g.constant(weights.w_i), out.terms.mse_i),
            g.mul(g.constant(weights.w_o), out.terms.mse_o)));

  out.breakdown.mse_m = out.terms.mse_m.value();
  out.breakdown.mse_g = out.terms.mse_g.value();
  out.breakdown.mse_o = out.terms.mse_o.value();
  out.breakdown.mse_i = out.terms.mse_i.value();
  out.breakdown.weights = weights;
  out.breakdown.total = out.total.value();
  return out;
}

double ComponentEvaluation::combine(const WeightState& w, std::span<double> gradient) const {
  if (gradient.size() != grad_m.size()) {
    throw std::invalid_argument("combine: gradient has the wrong length");
  }
  for (std::size_t k = 0; k < gradient.size(); ++k) {
    gradient[k] = w.w_m * grad_m[k] + w.w_g * grad_g[k] + w.w_i * grad_i[k] + w.w_o * grad_o[k];
  }
  LossBreakdown b = values;
  b.weights = w;
  return weighted_total(b);
}

LossEvaluator::LossEvaluator(CaseDefinition c, MeasurementSet data, MlpConfig config,
                             LossOptions options)
    : case_(std::move(c)),
      data_(std::move(data)),
      config_(std::move(config)),
      options_(options),
      n_params_(0) {
  config_.validate();
  data_.validate();
  n_params_ = config_.parameter_count();
  forcing_.reserve(data_.size());
  for (const double t : data_.times) forcing_.push_back(case_.forcing(t));
}

ComponentEvaluation LossEvaluator::evaluate_serial(std::span<const double> flat) const {
  if (flat.size() != n_params_) {
    throw std::invalid_argument("LossEvaluator: parameter vector has the wrong length");
  }
  ad::Graph g;
  const auto bound = bind_parameters(g, flat);
  const auto net = network_approximator(config_, bound);
  const auto loss = total_loss(g, net, bound.theta, case_, data_, WeightState{}, options_);

  ComponentEvaluation ev;
  ev.values = loss.breakdown;
  ev.grad_m = g.gradient(loss.terms.mse_m, n_params_);
  ev.grad_g = g.gradient(loss.terms.mse_g, n_params_);
  ev.grad_o = g.gradient(loss.terms.mse_o, n_params_);
  ev.grad_i = g.gradient(loss.terms.mse_i, n_params_);
  return ev;
}

ComponentEvaluation LossEvaluator::evaluate(std::span<const double> flat) const {
  if (case_.output_mode == OutputMode::generic_quadrature || case_.id == CaseName::generic) {
    return evaluate_serial(flat);
  }
  if (flat.size() != n_params_) {
    throw std::invalid_argument("LossEvaluator: parameter vector has the wrong length");
  }
  const std::size_t n = data_.size();
  const std::size_t p = n_params_;
  const double inv_n = 1.0 / static_cast<double>(n);

  // Per point: gradients of r_m^2/N, r_g^2/N, r_o^2/N. The extra task at the
  // end holds the initial-condition term.
  std::vector<double> partial((n + 1) * 3 * p, 0.0);
  std::vector<double> sq_m(n), sq_g(n), sq_o(n);
  double initial_value = 0.0;
  std::vector<std::exception_ptr> errors(n + 1);

  const auto tasks = static_cast<std::ptrdiff_t>(n + 1);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t task = 0; task < tasks; ++task) {
    const auto i = static_cast<std::size_t>(task);
    thread_local ad::Graph g;
    g.clear();
    try {
      const auto bound = bind_parameters(g, flat);
      const auto net = network_approximator(config_, bound);
      double* base = partial.data() + i * 3 * p;
      if (i < n) {
        const double t = data_.times[i];
        const auto input = g.variable(net.input_slot, t);
        const PointOutputs pt{t, input, net.outputs(input)};
        const ad::Expr r_m = g.sub(pt.out.u, g.constant(data_.values[i]));
        const ad::Expr r_g =
            governing_residual(g, pt, bound.theta, forcing_[i], case_.drift_sign);
        const ad::Expr r_o = closed_form_output_residual(g, case_, pt);
        const double vm = r_m.value(), vg = r_g.value(), vo = r_o.value();
        sq_m[i] = vm * vm;
        sq_g[i] = vg * vg;
        sq_o[i] = vo * vo;
        g.accumulate_gradient(r_m, 2.0 * vm * inv_n, {base, p});
        g.accumulate_gradient(r_g, 2.0 * vg * inv_n, {base + p, p});
        g.accumulate_gradient(r_o, 2.0 * vo * inv_n, {base + 2 * p, p});
      } else {
        const ad::Expr term = mse_initial(g, net, case_, options_);
        initial_value = term.value();
        g.accumulate_gradient(term, 1.0, {base, p});
      }
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  ComponentEvaluation ev;
  ev.grad_m.assign(p, 0.0);
  ev.grad_g.assign(p, 0.0);
  ev.grad_o.assign(p, 0.0);
  double sum_m = 0.0, sum_g = 0.0, sum_o = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sum_m += sq_m[i];
    sum_g += sq_g[i];
    sum_o += sq_o[i];
    const double* base = partial.data() + i * 3 * p;
    for (std::size_t k = 0; k < p; ++k) {
      ev.grad_m[k] += base[k];
      ev.grad_g[k] += base[p + k];
      ev.grad_o[k] += base[2 * p + k];
    }
  }
  ev.grad_i.assign(partial.begin() + static_cast<std::ptrdiff_t>(n * 3 * p),
                   partial.begin() + static_cast<std::ptrdiff_t>(n * 3 * p + p));
  ev.values.mse_m = sum_m * inv_n;
  ev.values.mse_g = sum_g * inv_n;
  ev.values.mse_o = sum_o * inv_n;
  ev.values.mse_i = initial_value;
  ev.values.total = weighted_total(ev.values);
  return ev;
}

}  // namespace vie
