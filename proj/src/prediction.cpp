#include "vie/prediction.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace vie {

double empirical_quantile(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw std::invalid_argument("empirical_quantile: no values");
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("empirical_quantile: p outside [0, 1]");
  const double h = static_cast<double>(sorted.size() - 1) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
}

namespace {

void check_band_inputs(const Ensemble& ensemble, std::size_t first_node, const TimeGrid& horizon,
                       double level) {
  if (ensemble.paths.empty()) throw std::invalid_argument("band: empty ensemble");
  if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("band: level outside (0, 1)");
  if (first_node + horizon.size() > ensemble.mean.values.size()) {
    throw std::invalid_argument("band: horizon runs past the ensemble grid");
  }
}

ConfidenceBand empty_band(const TimeGrid& horizon, double level) {
  ConfidenceBand band;
  band.grid = horizon;
  band.level = level;
  band.lower.resize(horizon.size());
  band.upper.resize(horizon.size());
  band.mean.resize(horizon.size());
  return band;
}

void fill_node(const Ensemble& ensemble, std::size_t node, std::vector<double>& column,
               double alpha, double& lower, double& upper) {
  for (std::size_t p = 0; p < ensemble.paths.size(); ++p) column[p] = ensemble.paths[p].values[node];
  std::sort(column.begin(), column.end());
  lower = empirical_quantile(column, alpha);
  upper = empirical_quantile(column, 1.0 - alpha);
}

}  // namespace

ConfidenceBand band_from_ensemble(const Ensemble& ensemble, std::size_t first_node,
                                  const TimeGrid& horizon, double level) {
  check_band_inputs(ensemble, first_node, horizon, level);
  auto band = empty_band(horizon, level);
  const double alpha = 0.5 * (1.0 - level);
  const auto count = static_cast<std::ptrdiff_t>(horizon.size());

#pragma omp parallel
  {
    std::vector<double> column(ensemble.paths.size());
#pragma omp for schedule(static)
    for (std::ptrdiff_t i = 0; i < count; ++i) {
      const auto k = static_cast<std::size_t>(i);
      fill_node(ensemble, first_node + k, column, alpha, band.lower[k], band.upper[k]);
      band.mean[k] = ensemble.mean.values[first_node + k];
    }
  }
  return band;
}

ConfidenceBand band_from_ensemble_serial(const Ensemble& ensemble, std::size_t first_node,
                                         const TimeGrid& horizon, double level) {
  check_band_inputs(ensemble, first_node, horizon, level);
  auto band = empty_band(horizon, level);
  const double alpha = 0.5 * (1.0 - level);
  std::vector<double> column(ensemble.paths.size());
  for (std::size_t k = 0; k < horizon.size(); ++k) {
    fill_node(ensemble, first_node + k, column, alpha, band.lower[k], band.upper[k]);
    band.mean[k] = ensemble.mean.values[first_node + k];
  }
  return band;
}

ConfidenceBand predict_band(const CaseDefinition& c, double theta_hat, double lambda,
                            double horizon_start, double horizon_end, const PredictOptions& options,
                            std::uint64_t seed) {
  if (options.n_steps == 0 || options.n_paths == 0) {
    throw std::invalid_argument("predict_band: n_steps and n_paths must be positive");
  }
  if (!(horizon_end > horizon_start) || horizon_start < c.t0) {
    throw std::invalid_argument("predict_band: horizon must satisfy t0 <= start < end");
  }
  const double dt = (horizon_end - horizon_start) / static_cast<double>(options.n_steps);
  const double lead = (horizon_start - c.t0) / dt;
  const double lead_steps = std::round(lead);
  if (std::abs(lead - lead_steps) > 1e-6) {
    throw std::invalid_argument("predict_band: horizon start is not a multiple of dt past t0");
  }
  const auto first = static_cast<std::size_t>(lead_steps);
  const auto grid = make_grid(c.t0, horizon_end, first + options.n_steps);
  const auto ensemble = simulate_ensemble(c.problem(theta_hat, lambda, grid), options.n_paths, seed);
  return band_from_ensemble(ensemble, first, make_grid(horizon_start, horizon_end, options.n_steps),
                            options.level);
}

std::vector<Trajectory> simulate_truth(const CaseDefinition& c, double lambda, double t_end,
                                       std::size_t n_steps, std::size_t n_paths,
                                       std::uint64_t seed) {
  const auto grid = make_grid(c.t0, t_end, n_steps);
  return simulate_ensemble(c.problem(c.true_theta, lambda, grid), n_paths, seed).paths;
}

double interpolate(const Trajectory& traj, double t) {
  const auto nodes = traj.grid.nodes();
  if (nodes.empty() || traj.values.size() != nodes.size()) {
    throw std::invalid_argument("interpolate: malformed trajectory");
  }
  const double tol = 1e-9 * std::max(1.0, traj.grid.dt());
  if (t < nodes.front() - tol || t > nodes.back() + tol) {
    throw std::out_of_range("interpolate: t outside the trajectory grid");
  }
  if (nodes.size() == 1) return traj.values.front();
  const double pos = std::clamp((t - nodes.front()) / traj.grid.dt(), 0.0,
                                static_cast<double>(nodes.size() - 1));
  const auto j = std::min(static_cast<std::size_t>(pos), nodes.size() - 2);
  const double w = (t - nodes[j]) / (nodes[j + 1] - nodes[j]);
  return traj.values[j] + std::clamp(w, 0.0, 1.0) * (traj.values[j + 1] - traj.values[j]);
}

CoverageReport coverage_check(const ConfidenceBand& band, std::span<const Trajectory> truth) {
  if (truth.empty()) throw std::invalid_argument("coverage_check: no truth trajectories");
  CoverageReport report;
  std::size_t inside_total = 0;
  report.strict_pass = true;
  const auto nodes = band.grid.nodes();
  for (const auto& traj : truth) {
    std::size_t inside = 0;
    std::size_t checked = 0;
    for (std::size_t k = 0; k < nodes.size(); ++k) {
      double x;
      try {
        x = interpolate(traj, nodes[k]);
      } catch (const std::out_of_range&) {
        continue;
      }
      ++checked;
      if (x >= band.lower[k] && x <= band.upper[k]) ++inside;
    }
    if (checked == 0) {
      throw std::invalid_argument("coverage_check: truth trajectory does not overlap the band");
    }
    report.per_trajectory.push_back(static_cast<double>(inside) / static_cast<double>(checked));
    if (inside != checked) report.strict_pass = false;
    inside_total += inside;
    report.nodes_checked += checked;
  }
  report.overall = static_cast<double>(inside_total) / static_cast<double>(report.nodes_checked);
  report.pass = report.overall >= band.level;
  return report;
}

}  // namespace vie
