// Acceptance suite: one PASS/FAIL line per criterion, details indented below.
// Exit status is nonzero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "support/manufactured.hpp"
#include "vie/experiment.hpp"
#include "vie/fit.hpp"
#include "vie/lbfgs.hpp"
#include "vie/network.hpp"
#include "vie/prediction.hpp"
#include "vie/simulator.hpp"

using namespace vie;

namespace {

// Master seeds for the five-seed criteria, fixed before any fit was run.
constexpr std::uint64_t kSeeds[] = {1, 2, 3, 4, 5};
constexpr std::size_t kMinPassingSeeds = 4;

int failures = 0;

void verdict(int id, bool pass, const std::string& what, double seconds) {
  std::printf("%s criterion %d: %s (%.1fs)\n", pass ? "PASS" : "FAIL", id, what.c_str(), seconds);
  std::fflush(stdout);
  if (!pass) ++failures;
}

template <class... Args>
void detail(const char* fmt, Args... args) {
  std::printf("    ");
  std::printf(fmt, args...);
  std::printf("\n");
}

class Clock {
 public:
  double lap() {
    const auto now = std::chrono::steady_clock::now();
    const double s = std::chrono::duration<double>(now - start_).count();
    start_ = now;
    return s;
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

struct FitRecord {
  std::string label;
  FitResult fit;
};
std::vector<FitRecord> all_fits;

FitResult run_fit(CaseName name, double lambda, std::uint64_t seed) {
  auto cfg = default_config(name);
  cfg.seed = seed;
  const auto c = make_case(name);
  const auto data = measurements_from(simulate_fit_ensemble(c, lambda, cfg), cfg.n_measurements);
  auto fit = fit_case(c, data, cfg.fit, seed);
  char label[64];
  std::snprintf(label, sizeof label, "%s lambda=%g seed=%llu", c.name.c_str(), lambda,
                static_cast<unsigned long long>(seed));
  all_fits.push_back({label, fit});
  return fit;
}

// ---------------------------------------------------------------------------

void criterion1() {
  Clock clock;
  bool ok = true;
  for (const auto name : {CaseName::case1, CaseName::case2, CaseName::case3}) {
    const auto c = make_case(name);
    const double tol = name == CaseName::case1 ? 0.5 : 0.05;
    double err[2];
    for (int k = 0; k < 2; ++k) {
      const auto grid = make_grid(c.t0, c.t_end, k == 0 ? 1000 : 2000);
      const auto traj = solve_fdm(c.problem(1.0, 0.0, grid), sample_brownian(grid, 1));
      err[k] = 0.0;
      for (std::size_t i = 0; i < grid.size(); ++i) {
        err[k] = std::max(err[k], std::abs(traj.values[i] - c.true_solution(grid.node(i))));
      }
    }
    const double ratio = err[0] / err[1];
    const bool pass = err[0] <= tol && ratio >= 1.8;
    ok = ok && pass;
    detail("%s: sup err n=1000 %.4e (tol %.2g), n=2000 %.4e, ratio %.3f (need >= 1.8) %s",
           c.name.c_str(), err[0], tol, err[1], ratio, pass ? "ok" : "FAIL");
  }
  verdict(1, ok, "deterministic forward accuracy and first-order refinement", clock.lap());
}

void criterion2() {
  Clock clock;
  struct Row {
    CaseName name;
    double tol;
  };
  bool ok = true;
  for (const auto& row : {Row{CaseName::case1, 1e-2}, Row{CaseName::case2, 2e-2},
                          Row{CaseName::case3, 5e-2}}) {
    std::size_t passed = 0;
    std::string thetas;
    for (const auto seed : kSeeds) {
      const auto fit = run_fit(row.name, 0.0, seed);
      if (std::abs(fit.theta_hat - 1.0) <= row.tol) ++passed;
      char buf[32];
      std::snprintf(buf, sizeof buf, " %.5f", fit.theta_hat);
      thetas += buf;
    }
    const bool pass = passed >= kMinPassingSeeds;
    ok = ok && pass;
    detail("%s lambda=0: |theta-1| <= %.0e on %zu/5 seeds, theta_hat:%s %s",
           to_string(row.name).c_str(), row.tol, passed, thetas.c_str(), pass ? "ok" : "FAIL");
  }
  verdict(2, ok, "noise-free identification of theta (>= 4 of 5 seeds)", clock.lap());
}

// Fits with seed kSeeds[0] reused by the coverage criterion.
struct CoverageInput {
  CaseName name;
  double lambda;
  double theta_hat;
};
std::vector<CoverageInput> coverage_inputs;

void criterion3() {
  Clock clock;
  struct Row {
    CaseName name;
    double lambda;
    double tol;
  };
  bool ok = true;
  for (const auto& row : {Row{CaseName::case1, 1.0, 5e-2}, Row{CaseName::case1, 20.0, 3e-1},
                          Row{CaseName::case2, 1.0, 5e-2}, Row{CaseName::case2, 2.0, 1e-1},
                          Row{CaseName::case3, 1.0, 4e-1}, Row{CaseName::case3, 2.0, 4.5e-1}}) {
    std::size_t passed = 0;
    std::string errs;
    for (const auto seed : kSeeds) {
      const auto fit = run_fit(row.name, row.lambda, seed);
      const double rel = (fit.theta_hat - 1.0) / 1.0;
      if (std::abs(rel) <= row.tol) ++passed;
      if (seed == kSeeds[0] && row.lambda == 1.0 && row.name != CaseName::case1) {
        coverage_inputs.push_back({row.name, row.lambda, fit.theta_hat});
      }
      char buf[32];
      std::snprintf(buf, sizeof buf, " %+.3e", rel);
      errs += buf;
    }
    const bool pass = passed >= kMinPassingSeeds;
    ok = ok && pass;
    detail("%s lambda=%g: |rel err| <= %.2g on %zu/5 seeds, rel err:%s %s",
           to_string(row.name).c_str(), row.lambda, row.tol, passed, errs.c_str(),
           pass ? "ok" : "FAIL");
  }
  verdict(3, ok, "noisy identification of theta (>= 4 of 5 seeds)", clock.lap());
}

void criterion4() {
  Clock clock;
  const auto case1_fit = run_fit(CaseName::case1, 5.0, kSeeds[0]);
  coverage_inputs.insert(coverage_inputs.begin(), {CaseName::case1, 5.0, case1_fit.theta_hat});
  bool ok = true;
  for (const auto& in : coverage_inputs) {
    const auto c = make_case(in.name);
    const auto cfg = default_config(in.name);
    const std::uint64_t seed = kSeeds[0];
    const auto truth = simulate_truth(c, in.lambda, cfg.horizon_end, cfg.truth_steps,
                                      cfg.truth_paths, seed + kTruthStream);
    const auto band = predict_band(c, in.theta_hat, in.lambda, cfg.horizon_start, cfg.horizon_end,
                                   cfg.predict, seed + kPredictStream);
    const auto report = coverage_check(band, truth);
    // Same band at the true theta; separates band statistics from fit error.
    const auto oracle_band = predict_band(c, c.true_theta, in.lambda, cfg.horizon_start,
                                          cfg.horizon_end, cfg.predict, seed + kPredictStream);
    const auto oracle = coverage_check(oracle_band, truth);
    ok = ok && report.pass;
    detail("%s lambda=%g horizon [%g,%g]: theta_hat %.5f coverage %.4f (need >= 0.95, strict %s) "
           "%s; with theta=1 the band covers %.4f",
           c.name.c_str(), in.lambda, cfg.horizon_start, cfg.horizon_end, in.theta_hat,
           report.overall, report.strict_pass ? "yes" : "no", report.pass ? "ok" : "FAIL",
           oracle.overall);
  }
  verdict(4, ok, "prediction band coverage of 20 fresh true trajectories", clock.lap());
}

// ---------------------------------------------------------------------------

bool property_autodiff() {
  MlpConfig config;
  config.init_seed = 99;
  auto params = init_parameters(config);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> normal(0.0, 0.1);
  auto flat = params.flatten();
  for (auto& v : flat) v += normal(rng);
  const std::size_t n = flat.size();
  const double times[] = {-0.6, 0.3, 1.1};

  auto scalar = [&](std::span<const double> x, std::vector<double>* grad) {
    ad::Graph g;
    const auto bound = bind_parameters(g, x);
    ad::Expr total = g.constant(0.0);
    for (const double t : times) {
      const auto in = g.variable(n, t);
      const auto out = forward(config, bound, in);
      total = total + out.u + out.v + 0.5 * g.derivative(out.v, in, 1) +
              0.25 * g.derivative(out.v, in, 2);
    }
    if (grad) *grad = g.gradient(total, n);
    return total.value();
  };

  std::vector<double> grad;
  scalar(flat, &grad);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  double worst = 0.0;
  double worst_abs = 0.0;
  std::size_t bad = 0;
  for (int k = 0; k < 100; ++k) {
    const auto i = pick(rng);
    auto xp = flat;
    auto xm = flat;
    const double h = 1e-5;
    xp[i] += h;
    xm[i] -= h;
    const double fd = (scalar(xp, nullptr) - scalar(xm, nullptr)) / (2.0 * h);
    const double abs_err = std::abs(fd - grad[i]);
    const double rel = abs_err / std::max(std::abs(fd), 1e-300);
    if (!(rel <= 1e-5 || abs_err <= 1e-8)) ++bad;
    if (std::abs(fd) > 1e-6) worst = std::max(worst, rel);
    worst_abs = std::max(worst_abs, abs_err);
  }
  detail("(a) parameter gradient vs central FD on 100 coordinates: worst rel err %.2e "
         "(|fd| > 1e-6), worst abs err %.2e, %zu above 1e-5",
         worst, worst_abs, bad);

  const auto p = ParameterSet::unflatten(flat, config);
  double worst2 = 0.0;
  for (const double t : {-0.9, -0.2, 0.4, 1.3, 2.5}) {
    ad::Graph g;
    const auto bound = bind_parameters(g, p);
    const auto in = g.variable(n, t);
    const double ad2 = g.derivative(forward(config, bound, in).v, in, 2).value();
    const double h = 1e-3;
    const double fd2 = (forward_value(p, t + h).v - 2.0 * forward_value(p, t).v +
                        forward_value(p, t - h).v) /
                       (h * h);
    worst2 = std::max(worst2, std::abs(ad2 - fd2) / std::max(std::abs(fd2), 1e-12));
  }
  detail("(a) second input derivative vs FD: worst rel err %.2e (tol 1e-3)", worst2);
  return bad == 0 && worst2 <= 1e-3;
}

bool property_ito() {
  const auto grid = make_grid(0.0, 3.0, 1000);
  double identity_gap = 0.0;
  std::size_t below = 0;
  for (std::uint64_t s = 0; s < 1000; ++s) {
    const auto path = sample_brownian(grid, path_seed(7, s));
    const auto closed = ito_term(path, NoiseMode::brownian_integrand);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double b = path.values[i];
      identity_gap = std::max(identity_gap, std::abs(closed[i] - (0.5 * b * b - 0.5 * grid.node(i))));
    }
    const auto sum = ito_left_point_sum(path);
    if (std::abs(sum.back() - closed.back()) < 0.15) ++below;
  }
  detail("(b) closed-form Ito identity max gap %.1e; left-point sum within 0.15 at t_end on "
         "%zu/1000 paths (need >= 950)",
         identity_gap, below);

  constexpr std::size_t kPaths = 10000;
  std::vector<double> sum(grid.size(), 0.0);
  double sq_end = 0.0;
  for (std::uint64_t s = 0; s < kPaths; ++s) {
    const auto path = sample_brownian(grid, path_seed(11, s));
    for (std::size_t i = 0; i < grid.size(); ++i) sum[i] += path.values[i];
    sq_end += path.values.back() * path.values.back();
  }
  double worst_z = 0.0;
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double se = std::sqrt(grid.node(i) / kPaths);
    worst_z = std::max(worst_z, std::abs(sum[i] / kPaths) / se);
  }
  const double mean_end = sum.back() / kPaths;
  const double var_end = sq_end / kPaths - mean_end * mean_end;
  detail("(b) E[B_t] = 0 over 1e4 paths: worst |mean|/SE %.2f (need <= 4); Var B(3) %.4f "
         "(need within 10%% of 3)",
         worst_z, var_end);
  return identity_gap <= 1e-12 && below >= 950 && worst_z <= 4.0 && std::abs(var_end - 3.0) <= 0.3;
}

bool property_weights() {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> expo(-8.0, 8.0);
  std::size_t bad = 0;
  for (int k = 0; k < 1000; ++k) {
    const auto w = adaptive_weights(std::pow(10.0, expo(rng)), std::pow(10.0, expo(rng)));
    if (std::min(w.w_g, w.w_o) != 1.0 || w.w_g < 1.0 || w.w_o < 1.0 || w.w_m != 1.0) ++bad;
  }
  detail("(c) min(w_g, w_o) == 1 on 1000 random positive pairs: %zu violations", bad);
  return bad == 0;
}

bool property_quadratic() {
  constexpr int n = 30;
  std::mt19937_64 rng(17);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = normal(rng);
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
  const Eigen::MatrixXd q = qr.householderQ();
  Eigen::VectorXd eig(n);
  for (int i = 0; i < n; ++i) eig(i) = std::pow(100.0, static_cast<double>(i) / (n - 1));
  const Eigen::MatrixXd a = q * eig.asDiagonal() * q.transpose();
  Eigen::VectorXd b(n);
  for (int i = 0; i < n; ++i) b(i) = normal(rng);
  const Eigen::VectorXd direct = a.ldlt().solve(b);

  const Objective f = [&](std::span<const double> x) {
    const Eigen::Map<const Eigen::VectorXd> xv(x.data(), n);
    const Eigen::VectorXd g = a * xv - b;
    return Evaluation{0.5 * xv.dot(a * xv) - b.dot(xv), std::vector<double>(g.data(), g.data() + n)};
  };
  OptimizerConfig cfg;
  cfg.max_iterations = 200;
  cfg.gradient_tolerance = 1e-9;
  const auto r = minimize(f, std::vector<double>(n, 0.0), cfg);
  const Eigen::Map<const Eigen::VectorXd> x(r.x.data(), n);
  const Eigen::VectorXd g = a * x - b;
  const double gap = (x - direct).lpNorm<Eigen::Infinity>();
  detail("(d) 30-D quadratic, cond 100: %d iterations, |grad| %.2e (need <= 1e-8), "
         "max |x - A^-1 b| %.2e (need <= 1e-6)",
         r.iterations, g.norm(), gap);
  return g.norm() <= 1e-8 && gap <= 1e-6;
}

bool property_manufactured() {
  bool ok = true;
  for (const auto name : {CaseName::case1, CaseName::case2, CaseName::case3}) {
    const auto c = make_case(name);
    const auto grid = make_grid(c.t0, c.t_end, 1000);
    std::vector<double> times;
    for (const auto& s : subsample_measurements(Trajectory{grid, std::vector<double>(grid.size())}, 50)) {
      times.push_back(s.t);
    }
    const auto net = testing::manufactured_approximator(name);
    ad::Graph g;
    const auto theta = g.constant(1.0);
    const double mg = mse_governing(g, net, theta, c, times).value();
    const double mo = mse_output_condition(g, net, c, times).value();
    const double mi = mse_initial(g, net, c).value();
    const double limit = 10.0 * grid.dt();
    const bool pass = mg < limit && mo < limit && mi < limit;
    ok = ok && pass;
    detail("(e) %s exact solution: mse_g %.1e mse_o %.1e mse_i %.1e (need < %.3g) %s",
           c.name.c_str(), mg, mo, mi, limit, pass ? "ok" : "FAIL");
  }
  return ok;
}

void criterion5() {
  Clock clock;
  const bool a = property_autodiff();
  const bool b = property_ito();
  const bool c = property_weights();
  const bool d = property_quadratic();
  const bool e = property_manufactured();
  verdict(5, a && b && c && d && e, "property suites (a)-(e)", clock.lap());
}

void criterion6() {
  Clock clock;
  const double tol = OptimizerConfig{}.roundoff_tolerance;
  std::size_t steps = 0;
  std::size_t violations = 0;
  std::size_t within_roundoff = 0;
  std::size_t raw_increases = 0;
  for (const auto& rec : all_fits) {
    for (const auto& s : rec.fit.steps) {
      ++steps;
      if (s.value <= s.value_before) continue;
      if (s.value <= s.value_before + tol * std::max(1.0, std::abs(s.value_before))) {
        ++within_roundoff;
        continue;
      }
      ++violations;
      detail("%s iteration %d: %.6e -> %.6e", rec.label.c_str(), s.iteration, s.value_before,
             s.value);
    }
    for (std::size_t k = 1; k < rec.fit.history.size(); ++k) {
      if (rec.fit.history[k].total > rec.fit.history[k - 1].total) ++raw_increases;
    }
  }
  detail("%zu fits, %zu accepted steps: %zu with F_k(x_k+1) > F_k(x_k) beyond relative roundoff "
         "%.0e under the step's frozen weights",
         all_fits.size(), steps, violations, tol);
  detail("%zu steps rose by less than the roundoff tolerance", within_roundoff);
  detail("informational: %zu increases between consecutive recorded totals, which use "
         "different weights",
         raw_increases);
  verdict(6, violations == 0 && steps > 0, "monotone training objective in every acceptance fit",
          clock.lap());
}

}  // namespace

int main() {
  criterion1();
  criterion5();
  criterion2();
  criterion3();
  criterion4();
  criterion6();
  std::printf("%s: %d criteria failed\n", failures == 0 ? "ACCEPTANCE PASSED" : "ACCEPTANCE FAILED",
              failures);
  return failures == 0 ? 0 : 1;
}
