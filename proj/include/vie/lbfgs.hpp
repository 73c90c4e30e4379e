#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace vie {

struct OptimizerConfig {
  int max_iterations = 200;
  /// Scale of the very first trial step; later line searches start at 1.
  double learning_rate = 0.01;
  int history_size = 10;
  double c1 = 1e-4;
  double c2 = 0.9;
  int max_line_search_trials = 25;
  double gradient_tolerance = 1e-9;
  /// Relative band around f(x) inside which trial values count as equal and
  /// only the slope conditions are checked. 0 disables it.
  double roundoff_tolerance = 1e-12;

  void validate() const;
};

enum class Termination { max_iterations, gradient_tolerance, line_search_failure };

std::string to_string(Termination t);

struct Evaluation {
  double value = 0.0;
  std::vector<double> gradient;
};

using Objective = std::function<Evaluation(std::span<const double> x)>;

struct StepInfo {
  int iteration = 0;        // 1-based count of accepted steps
  double value_before = 0.0;
  double value = 0.0;       // objective at the accepted point
  double step = 0.0;
  int evaluations = 0;      // line-search evaluations for this step
};

/// Called after every accepted step. The hook may replace `current` (value
/// and gradient at x) when it changes the objective; it must return true in
/// that case so the optimizer knows the previous point is stale.
using IterationHook =
    std::function<bool(const StepInfo& info, std::span<const double> x, Evaluation& current)>;

struct MinimizeResult {
  std::vector<double> x;
  Evaluation final;
  int iterations = 0;
  int evaluations = 0;
  Termination reason = Termination::max_iterations;
  std::vector<StepInfo> steps;
};

/// Rolling window of curvature pairs and the two-loop recursion.
class LbfgsHistory {
 public:
  explicit LbfgsHistory(std::size_t capacity) : capacity_(capacity) {}

  /// Skips the pair when s.y <= 1e-10 |s| |y|. Returns whether it was stored.
  bool push(std::vector<double> s, std::vector<double> y);
  void clear() { pairs_.clear(); }
  std::size_t size() const noexcept { return pairs_.size(); }

  /// -H g, with H0 = (s.y / y.y) I from the newest pair (I when empty).
  std::vector<double> direction(std::span<const double> gradient) const;

 private:
  struct Pair {
    std::vector<double> s;
    std::vector<double> y;
    double rho;
  };
  std::size_t capacity_;
  std::deque<Pair> pairs_;
};

struct LineSearchResult {
  bool converged = false;  // strong Wolfe conditions met
  bool decreased = false;  // sufficient decrease met (fallback acceptance)
  double step = 0.0;
  Evaluation at_step;
  int evaluations = 0;
};

/// Strong-Wolfe bracketing/zoom search along `direction` from x.
/// Non-finite trial values shrink the step.
LineSearchResult strong_wolfe_search(const Objective& objective, std::span<const double> x,
                                     const Evaluation& at_x, std::span<const double> direction,
                                     double initial_step, const OptimizerConfig& config);

MinimizeResult minimize(const Objective& objective, std::vector<double> start,
                        const OptimizerConfig& config, const IterationHook& hook = {});

}  // namespace vie
