#include "vie/simulator.hpp"

#include <cmath>
#include <exception>
#include <random>
#include <sstream>

namespace vie {

TimeGrid make_grid(double t0, double t_end, std::size_t n) {
  if (!std::isfinite(t0) || !std::isfinite(t_end) || !(t_end > t0)) {
    throw std::invalid_argument("make_grid: need finite t_end > t0");
  }
  if (n == 0) {
    throw std::invalid_argument("make_grid: need at least one subinterval");
  }
  TimeGrid g;
  g.t0_ = t0;
  g.t_end_ = t_end;
  g.n_ = n;
  g.dt_ = (t_end - t0) / static_cast<double>(n);
  g.nodes_.resize(n + 1);
  for (std::size_t i = 0; i < n; ++i) {
    g.nodes_[i] = t0 + static_cast<double>(i) * g.dt_;
  }
  g.nodes_[n] = t_end;
  return g;
}

std::string to_string(NoiseMode mode) {
  switch (mode) {
    case NoiseMode::additive_brownian:
      return "additive_brownian";
    case NoiseMode::brownian_integrand:
      return "brownian_integrand";
  }
  return "unknown";
}

NoiseMode noise_mode_from_string(const std::string& name) {
  if (name == "additive_brownian") return NoiseMode::additive_brownian;
  if (name == "brownian_integrand") return NoiseMode::brownian_integrand;
  throw std::invalid_argument("unknown noise mode '" + name + "'");
}

namespace {

std::uint64_t splitmix64(std::uint64_t z) noexcept {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

std::uint64_t path_seed(std::uint64_t master, std::uint64_t index) noexcept {
  // Hashing the master first keeps ensembles of adjacent master seeds disjoint.
  return splitmix64(splitmix64(master) + index);
}

BrownianPath sample_brownian(const TimeGrid& grid, std::uint64_t seed) {
  BrownianPath path{grid, std::vector<double>(grid.size(), 0.0), seed};
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double sd = std::sqrt(grid.dt());
  for (std::size_t j = 1; j < grid.size(); ++j) {
    path.values[j] = path.values[j - 1] + sd * normal(rng);
  }
  return path;
}

std::vector<double> ito_term(const BrownianPath& path, NoiseMode mode) {
  if (mode == NoiseMode::additive_brownian) {
    return path.values;
  }
  const auto nodes = path.grid.nodes();
  const double t0 = path.grid.t0();
  std::vector<double> out(path.values.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double b = path.values[i];
    out[i] = 0.5 * b * b - 0.5 * (nodes[i] - t0);
  }
  return out;
}

std::vector<double> ito_left_point_sum(const BrownianPath& path) {
  std::vector<double> out(path.values.size(), 0.0);
  for (std::size_t j = 1; j < out.size(); ++j) {
    out[j] = out[j - 1] + path.values[j - 1] * (path.values[j] - path.values[j - 1]);
  }
  return out;
}

FdmOperator::FdmOperator(const ProblemSpec& spec) : grid_(spec.grid) {
  if (grid_.size() < 2) {
    throw std::invalid_argument("FdmOperator: spec has no grid");
  }
  const auto nodes = grid_.nodes();
  const std::size_t m = nodes.size();
  const double dt = grid_.dt();
  forcing_.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    forcing_[i] = spec.forcing(nodes[i]);
  }
  weights_.resize(m * (m - 1) / 2);
  for (std::size_t i = 1; i < m; ++i) {
    double* row = weights_.data() + i * (i - 1) / 2;
    for (std::size_t j = 0; j < i; ++j) {
      row[j] = spec.kernel(spec.theta, nodes[i], nodes[j]) * dt;
    }
  }
}

Trajectory FdmOperator::apply(std::span<const double> noise, double lambda,
                              std::ptrdiff_t path_index) const {
  const std::size_t m = grid_.size();
  if (noise.size() != m) {
    throw std::invalid_argument("FdmOperator::apply: noise length does not match grid");
  }
  Trajectory out{grid_, std::vector<double>(m)};
  double* x = out.values.data();
  for (std::size_t i = 0; i < m; ++i) {
    const double* row = weights_.data() + (i == 0 ? 0 : i * (i - 1) / 2);
    double acc = 0.0;
    for (std::size_t j = 0; j < i; ++j) {
      acc += row[j] * x[j];
    }
    x[i] = forcing_[i] + acc + lambda * noise[i];
    if (!std::isfinite(x[i])) {
      std::ostringstream msg;
      msg << "numerical blowup at node " << i << " (t=" << grid_.nodes()[i] << ")";
      if (path_index >= 0) msg << " in path " << path_index;
      throw NumericalBlowup(i, path_index, msg.str());
    }
  }
  return out;
}

Trajectory solve_fdm(const ProblemSpec& spec, const BrownianPath& path) {
  if (!(path.grid == spec.grid)) {
    throw std::invalid_argument("solve_fdm: path grid differs from problem grid");
  }
  const FdmOperator op(spec);
  return op.apply(ito_term(path, spec.noise_mode), spec.lambda);
}

Trajectory pointwise_mean(std::span<const Trajectory> paths) {
  if (paths.empty()) {
    throw std::invalid_argument("pointwise_mean: no paths");
  }
  Trajectory mean{paths.front().grid, std::vector<double>(paths.front().values.size(), 0.0)};
  for (const auto& p : paths) {
    if (!(p.grid == mean.grid)) {
      throw std::invalid_argument("pointwise_mean: paths on different grids");
    }
    for (std::size_t j = 0; j < p.values.size(); ++j) mean.values[j] += p.values[j];
  }
  const double inv = 1.0 / static_cast<double>(paths.size());
  for (auto& v : mean.values) v *= inv;
  return mean;
}

namespace {

Trajectory simulate_member(const FdmOperator& op, const ProblemSpec& spec, std::uint64_t seed,
                           std::size_t index) {
  const auto path = sample_brownian(spec.grid, path_seed(seed, index));
  return op.apply(ito_term(path, spec.noise_mode), spec.lambda,
                  static_cast<std::ptrdiff_t>(index));
}

void check_paths(std::size_t n_paths) {
  if (n_paths == 0) {
    throw std::invalid_argument("simulate_ensemble: n_paths must be positive");
  }
}

}  // namespace

Ensemble simulate_ensemble(const ProblemSpec& spec, std::size_t n_paths, std::uint64_t seed) {
  check_paths(n_paths);
  const FdmOperator op(spec);
  Ensemble ens;
  ens.paths.resize(n_paths);
  std::vector<std::exception_ptr> errors(n_paths);

  const auto count = static_cast<std::ptrdiff_t>(n_paths);
#pragma omp parallel for schedule(dynamic, 4)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    const auto k = static_cast<std::size_t>(i);
    try {
      ens.paths[k] = simulate_member(op, spec, seed, k);
    } catch (...) {
      errors[k] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  ens.mean = pointwise_mean(ens.paths);
  return ens;
}

Ensemble simulate_ensemble_serial(const ProblemSpec& spec, std::size_t n_paths,
                                  std::uint64_t seed) {
  check_paths(n_paths);
  const FdmOperator op(spec);
  Ensemble ens;
  ens.paths.reserve(n_paths);
  for (std::size_t i = 0; i < n_paths; ++i) {
    ens.paths.push_back(simulate_member(op, spec, seed, i));
  }
  ens.mean = pointwise_mean(ens.paths);
  return ens;
}

std::vector<Sample> subsample_measurements(const Trajectory& traj, std::size_t count) {
  if (count < 2) {
    throw std::invalid_argument("subsample_measurements: need at least 2 points");
  }
  const std::size_t m = traj.values.size();
  if (count > m) {
    throw std::invalid_argument("subsample_measurements: " + std::to_string(count) +
                                " points requested from a grid of " + std::to_string(m) +
                                " nodes");
  }
  const std::size_t n = m - 1;
  std::vector<Sample> out;
  out.reserve(count);
  const auto nodes = traj.grid.nodes();
  for (std::size_t j = 0; j < count; ++j) {
    const auto idx = static_cast<std::size_t>(
        std::llround(static_cast<double>(j) * static_cast<double>(n) / static_cast<double>(count - 1)));
    out.push_back({nodes[idx], traj.values[idx]});
  }
  return out;
}

}  // namespace vie
