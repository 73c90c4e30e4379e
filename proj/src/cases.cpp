#include "vie/cases.hpp"

#include <cmath>
#include <stdexcept>

namespace vie {

ProblemSpec CaseDefinition::problem(double theta, double lambda, const TimeGrid& grid) const {
  if (lambda < 0.0) throw std::invalid_argument("noise level must be non-negative");
  ProblemSpec spec;
  spec.forcing = forcing;
  const double sign = drift_sign;
  spec.kernel = [k = kernel, sign](double th, double t, double s) { return sign * th * k(t, s); };
  spec.kernel_dt = [k = kernel_dt, sign](double th, double t, double s) {
    return sign * th * k(t, s);
  };
  spec.theta = theta;
  spec.noise_mode = noise_mode;
  spec.lambda = lambda;
  spec.grid = grid;
  return spec;
}

namespace {

CaseDefinition case1() {
  CaseDefinition c;
  c.id = CaseName::case1;
  c.name = "case1";
  c.t0 = 0.0;
  c.t_end = 3.0;
  c.forcing = [](double t) { return 4.0 * std::exp(t) + 3.0 * t - 4.0; };
  c.kernel = [](double t, double s) { return t - s; };
  c.kernel_dt = [](double, double) { return 1.0; };
  c.noise_mode = NoiseMode::brownian_integrand;
  c.t_ic = 0.0;
  c.true_solution = [](double t) {
    return 2.0 * std::exp(t) - 2.0 * std::cos(t) + 5.0 * std::sin(t);
  };
  c.default_lambdas = {0.0, 1.0, 5.0, 20.0};
  return c;
}

CaseDefinition case2() {
  CaseDefinition c;
  c.id = CaseName::case2;
  c.name = "case2";
  c.t0 = -1.0;
  c.t_end = 0.5;
  c.forcing = [](double t) {
    const double et = std::exp(t);
    return std::exp(-t) + std::exp(3.0 * t) + et * (t + 1.0) +
           0.25 * et * (std::exp(4.0 * t) - std::exp(-4.0));
  };
  // e^{t+s-1} X(s-1) over s in [0, t+1] becomes e^{t+r} X(r) over r in [-1, t]
  c.kernel = [](double t, double r) { return std::exp(t + r); };
  c.kernel_dt = [](double t, double r) { return std::exp(t + r); };
  c.noise_mode = NoiseMode::brownian_integrand;
  c.t_ic = -1.0;
  c.true_solution = [](double t) { return std::exp(-t) + std::exp(3.0 * t); };
  c.default_lambdas = {0.0, 0.1, 1.0, 2.0};
  return c;
}

CaseDefinition case3() {
  CaseDefinition c;
  c.id = CaseName::case3;
  c.name = "case3";
  c.t0 = -1.0;
  c.t_end = 0.5;
  c.forcing = [](double t) {
    const double g = std::exp(-t * t);
    return g + 0.5 * t * std::exp(-1.0) - 0.5 * t * g;
  };
  // t (s-1) X(s-1) over s in [0, t+1] becomes t r X(r) over r in [-1, t]
  c.kernel = [](double t, double r) { return t * r; };
  c.kernel_dt = [](double, double r) { return r; };
  c.noise_mode = NoiseMode::additive_brownian;
  c.t_ic = -1.0;
  c.true_solution = [](double t) { return std::exp(-t * t); };
  c.default_lambdas = {0.0, 0.1, 1.0, 2.0};
  return c;
}

}  // namespace

CaseDefinition make_case(CaseName name) {
  switch (name) {
    case CaseName::case1: return case1();
    case CaseName::case2: return case2();
    case CaseName::case3: return case3();
    case CaseName::generic: break;
  }
  throw std::invalid_argument("make_case: generic cases are built by the caller");
}

CaseName case_name_from_string(const std::string& name) {
  if (name == "case1" || name == "1") return CaseName::case1;
  if (name == "case2" || name == "2") return CaseName::case2;
  if (name == "case3" || name == "3") return CaseName::case3;
  throw std::invalid_argument("unknown case '" + name + "' (expected case1, case2 or case3)");
}

std::string to_string(CaseName name) {
  switch (name) {
    case CaseName::case1: return "case1";
    case CaseName::case2: return "case2";
    case CaseName::case3: return "case3";
    case CaseName::generic: return "generic";
  }
  return "unknown";
}

}  // namespace vie
