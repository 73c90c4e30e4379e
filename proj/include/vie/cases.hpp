#pragma once

#include <functional>
#include <string>
#include <vector>

#include "vie/simulator.hpp"

namespace vie {

enum class CaseName { case1, case2, case3, generic };

/// How the auxiliary-output constraint is imposed.
enum class OutputMode {
  closed_form,         // case-specific differential relation between u and v
  generic_quadrature,  // v' = k(t,t) u + quadrature of dk/dt u
};

/// A benchmark equation
///   X(t) = f(t) + sign * theta * int_{t0}^{t} k(t,s) X(s) ds + lambda * noise(t).
///
/// Cases 2 and 3 integrate over s in [0, t+1] against X(s-1); they are stored
/// after the substitution r = s - 1, so every case integrates from the
/// domain start t0 and the Brownian clock runs from t0.
struct CaseDefinition {
  CaseName id = CaseName::generic;
  std::string name;
  double t0 = 0.0;
  double t_end = 1.0;
  std::function<double(double)> forcing;
  std::function<double(double t, double s)> kernel;
  std::function<double(double t, double s)> kernel_dt;
  double drift_sign = -1.0;
  NoiseMode noise_mode = NoiseMode::additive_brownian;
  double t_ic = 0.0;  // v(t_ic) = 0
  double true_theta = 1.0;
  std::function<double(double)> true_solution;  // lambda = 0, theta = true_theta
  std::vector<double> default_lambdas;
  OutputMode output_mode = OutputMode::closed_form;

  /// Problem data for the simulator on `grid`, with the drift sign and
  /// theta folded into the kernel.
  ProblemSpec problem(double theta, double lambda, const TimeGrid& grid) const;
};

CaseDefinition make_case(CaseName name);
CaseName case_name_from_string(const std::string& name);
std::string to_string(CaseName name);

}  // namespace vie
