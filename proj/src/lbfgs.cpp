#include "vie/lbfgs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>

namespace vie {

void OptimizerConfig::validate() const {
  if (max_iterations <= 0 || history_size <= 0 || max_line_search_trials <= 0) {
    throw std::invalid_argument("OptimizerConfig: counts must be positive");
  }
  if (!(learning_rate > 0.0) || !(gradient_tolerance > 0.0)) {
    throw std::invalid_argument("OptimizerConfig: learning rate and tolerance must be positive");
  }
  if (!(roundoff_tolerance >= 0.0)) {
    throw std::invalid_argument("OptimizerConfig: roundoff tolerance must be non-negative");
  }
  if (!(c1 > 0.0 && c1 < c2 && c2 < 1.0)) {
    throw std::invalid_argument("OptimizerConfig: need 0 < c1 < c2 < 1");
  }
}

std::string to_string(Termination t) {
  switch (t) {
    case Termination::max_iterations: return "max-iter";
    case Termination::gradient_tolerance: return "gradient-tol";
    case Termination::line_search_failure: return "line-search-failure";
  }
  return "unknown";
}

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

bool finite(const Evaluation& e) {
  if (!std::isfinite(e.value)) return false;
  return std::all_of(e.gradient.begin(), e.gradient.end(), [](double v) { return std::isfinite(v); });
}

double cubic_minimizer(double x1, double f1, double g1, double x2, double f2, double g2,
                       double lo, double hi) {
  const double d1 = g1 + g2 - 3.0 * (f1 - f2) / (x1 - x2);
  const double d2sq = d1 * d1 - g1 * g2;
  if (d2sq >= 0.0) {
    const double d2 = std::sqrt(d2sq);
    double m = x1 <= x2 ? x2 - (x2 - x1) * ((g2 + d2 - d1) / (g2 - g1 + 2.0 * d2))
                        : x1 - (x1 - x2) * ((g1 + d2 - d1) / (g1 - g2 + 2.0 * d2));
    if (std::isfinite(m)) return std::clamp(m, lo, hi);
  }
  return 0.5 * (lo + hi);
}

struct Trial {
  double step = 0.0;
  double value = 0.0;
  double slope = 0.0;  // directional derivative
  Evaluation eval;
};

}  // namespace

bool LbfgsHistory::push(std::vector<double> s, std::vector<double> y) {
  const double sy = dot(s, y);
  if (!(sy > 1e-10 * norm2(s) * norm2(y))) return false;
  if (pairs_.size() == capacity_) pairs_.pop_front();
  pairs_.push_back({std::move(s), std::move(y), 1.0 / sy});
  return true;
}

std::vector<double> LbfgsHistory::direction(std::span<const double> gradient) const {
  std::vector<double> q(gradient.begin(), gradient.end());
  std::vector<double> alpha(pairs_.size());
  for (std::size_t k = pairs_.size(); k-- > 0;) {
    const auto& p = pairs_[k];
    alpha[k] = p.rho * dot(p.s, q);
    for (std::size_t i = 0; i < q.size(); ++i) q[i] -= alpha[k] * p.y[i];
  }
  if (!pairs_.empty()) {
    const auto& last = pairs_.back();
    const double gamma = dot(last.s, last.y) / dot(last.y, last.y);
    for (auto& v : q) v *= gamma;
  }
  for (std::size_t k = 0; k < pairs_.size(); ++k) {
    const auto& p = pairs_[k];
    const double beta = p.rho * dot(p.y, q);
    for (std::size_t i = 0; i < q.size(); ++i) q[i] += (alpha[k] - beta) * p.s[i];
  }
  for (auto& v : q) v = -v;
  return q;
}

LineSearchResult strong_wolfe_search(const Objective& objective, std::span<const double> x,
                                     const Evaluation& at_x, std::span<const double> direction,
                                     double initial_step, const OptimizerConfig& config) {
  const double f0 = at_x.value;
  const double slope0 = dot(at_x.gradient, direction);
  LineSearchResult result;
  if (!(slope0 < 0.0)) return result;

  std::vector<double> trial_x(x.size());
  auto probe = [&](double step) {
    for (std::size_t i = 0; i < x.size(); ++i) trial_x[i] = x[i] + step * direction[i];
    Trial t;
    t.step = step;
    try {
      t.eval = objective(trial_x);
    } catch (const std::exception&) {
      t.eval.value = std::numeric_limits<double>::infinity();
    }
    ++result.evaluations;
    if (finite(t.eval)) {
      t.value = t.eval.value;
      t.slope = dot(t.eval.gradient, direction);
    } else {
      t.value = std::numeric_limits<double>::infinity();
      t.slope = std::numeric_limits<double>::quiet_NaN();
    }
    return t;
  };
  // Near a minimizer the decrease predicted by Armijo drops below the rounding
  // error of f. Values within roundoff_tolerance of f0 are judged by the slope
  // alone (approximate Wolfe test of Hager and Zhang).
  const double flat_tol = config.roundoff_tolerance * std::max(1.0, std::abs(f0));
  auto flat = [&](const Trial& t) { return std::abs(t.value - f0) <= flat_tol; };
  auto sufficient = [&](const Trial& t) {
    return t.value <= f0 + config.c1 * t.step * slope0 || flat(t);
  };
  auto curvature = [&](const Trial& t) { return std::abs(t.slope) <= -config.c2 * slope0; };

  std::optional<Trial> best;  // lowest value satisfying sufficient decrease
  auto remember = [&](const Trial& t) {
    if (std::isfinite(t.value) && sufficient(t) && t.value < f0 &&
        (!best || t.value < best->value)) {
      best = t;
    }
  };
  auto accept = [&](Trial t, bool strong) {
    result.converged = strong;
    result.decreased = true;
    result.step = t.step;
    result.at_step = std::move(t.eval);
    return result;
  };

  Trial prev;
  prev.step = 0.0;
  prev.value = f0;
  prev.slope = slope0;
  Trial lo, hi;
  bool bracketed = false;
  double step = initial_step;

  // Bracketing phase.
  while (result.evaluations < config.max_line_search_trials) {
    Trial cur = probe(step);
    if (!std::isfinite(cur.value)) {
      // Too far: shrink toward the last finite point and retry.
      step = prev.step + 0.5 * (step - prev.step);
      continue;
    }
    remember(cur);
    const bool no_better = !(flat(cur) && flat(prev)) && cur.value >= prev.value;
    if (!sufficient(cur) || (result.evaluations > 1 && no_better)) {
      lo = prev;
      hi = std::move(cur);
      bracketed = true;
      break;
    }
    if (curvature(cur)) return accept(std::move(cur), true);
    if (cur.slope >= 0.0) {
      lo = std::move(cur);
      hi = prev;
      bracketed = true;
      break;
    }
    const double lower = cur.step + 0.01 * (cur.step - prev.step);
    const double upper = cur.step * 10.0;
    const double next = cubic_minimizer(prev.step, prev.value, prev.slope, cur.step, cur.value,
                                        cur.slope, lower, upper);
    prev = std::move(cur);
    step = next;
  }

  // Zoom phase: lo always satisfies sufficient decrease and has the lower value.
  bool insufficient_progress = false;
  while (bracketed && result.evaluations < config.max_line_search_trials) {
    const double a = std::min(lo.step, hi.step);
    const double b = std::max(lo.step, hi.step);
    if ((b - a) * std::max(1.0, norm2(direction)) < 1e-12) break;
    double t;
    if (std::isfinite(hi.value)) {
      t = cubic_minimizer(lo.step, lo.value, lo.slope, hi.step, hi.value, hi.slope, a, b);
    } else {
      t = 0.5 * (a + b);
    }
    const double eps = 0.1 * (b - a);
    if (std::min(b - t, t - a) < eps) {
      if (insufficient_progress || t >= b || t <= a) {
        t = std::abs(t - b) < std::abs(t - a) ? b - eps : a + eps;
        insufficient_progress = false;
      } else {
        insufficient_progress = true;
      }
    } else {
      insufficient_progress = false;
    }

    Trial cur = probe(t);
    remember(cur);
    const bool no_better = !(flat(cur) && flat(lo)) && cur.value >= lo.value;
    if (!std::isfinite(cur.value) || !sufficient(cur) || no_better) {
      hi = std::move(cur);
      continue;
    }
    if (curvature(cur)) return accept(std::move(cur), true);
    if (cur.slope * (hi.step - lo.step) >= 0.0) hi = lo;
    lo = std::move(cur);
  }

  if (best) return accept(std::move(*best), false);
  return result;
}

MinimizeResult minimize(const Objective& objective, std::vector<double> start,
                        const OptimizerConfig& config, const IterationHook& hook) {
  config.validate();
  MinimizeResult out;
  out.x = std::move(start);
  Evaluation cur = objective(out.x);
  out.evaluations = 1;
  if (!finite(cur) || cur.gradient.size() != out.x.size()) {
    throw std::invalid_argument("minimize: objective is not finite at the starting point");
  }

  LbfgsHistory history(static_cast<std::size_t>(config.history_size));
  out.reason = Termination::max_iterations;
  for (int k = 1; k <= config.max_iterations; ++k) {
    double gmax = 0.0;
    for (const double v : cur.gradient) gmax = std::max(gmax, std::abs(v));
    if (gmax <= config.gradient_tolerance) {
      out.reason = Termination::gradient_tolerance;
      break;
    }

    auto dir = history.direction(cur.gradient);
    if (!(dot(dir, cur.gradient) < 0.0)) {
      history.clear();
      dir = history.direction(cur.gradient);
    }
    double step0 = 1.0;
    if (history.size() == 0) {
      double l1 = 0.0;
      for (const double v : cur.gradient) l1 += std::abs(v);
      step0 = config.learning_rate * std::min(1.0, 1.0 / l1);
    }

    auto ls = strong_wolfe_search(objective, out.x, cur, dir, step0, config);
    out.evaluations += ls.evaluations;
    if (!ls.decreased) {
      out.reason = Termination::line_search_failure;
      break;
    }

    std::vector<double> s(dir.size()), y(dir.size());
    for (std::size_t i = 0; i < dir.size(); ++i) {
      s[i] = ls.step * dir[i];
      y[i] = ls.at_step.gradient[i] - cur.gradient[i];
      out.x[i] += s[i];
    }
    history.push(std::move(s), std::move(y));

    StepInfo info;
    info.iteration = k;
    info.value_before = cur.value;
    info.value = ls.at_step.value;
    info.step = ls.step;
    info.evaluations = ls.evaluations;
    out.steps.push_back(info);
    out.iterations = k;
    cur = std::move(ls.at_step);
    if (hook) hook(info, out.x, cur);
  }
  out.final = std::move(cur);
  return out;
}

}  // namespace vie
