#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace vie {

/// Uniform partition of [t0, t_end] into n subintervals.
class TimeGrid {
 public:
  TimeGrid() = default;

  double t0() const noexcept { return t0_; }
  double t_end() const noexcept { return t_end_; }
  std::size_t steps() const noexcept { return n_; }
  double dt() const noexcept { return dt_; }
  std::span<const double> nodes() const noexcept { return nodes_; }
  double node(std::size_t i) const { return nodes_.at(i); }
  std::size_t size() const noexcept { return nodes_.size(); }

  friend bool operator==(const TimeGrid&, const TimeGrid&) = default;

 private:
  friend TimeGrid make_grid(double t0, double t_end, std::size_t n);

  double t0_ = 0.0;
  double t_end_ = 0.0;
  std::size_t n_ = 0;
  double dt_ = 0.0;
  std::vector<double> nodes_;
};

/// Throws std::invalid_argument when t_end <= t0 or n == 0.
TimeGrid make_grid(double t0, double t_end, std::size_t n);

struct BrownianPath {
  TimeGrid grid;
  std::vector<double> values;  // B at each node, values[0] == 0
  std::uint64_t seed = 0;
};

enum class NoiseMode {
  additive_brownian,   // int dB_s       -> B_t
  brownian_integrand,  // int B_s dB_s   -> B_t^2/2 - t/2
};

std::string to_string(NoiseMode mode);
NoiseMode noise_mode_from_string(const std::string& name);

/// One instance of X(t) = f(t) + int k(theta,t,s) X(s) ds + lambda * noise(t).
///
/// `kernel` already carries theta and the sign of the drift term; `kernel_dt`
/// is its analytic partial derivative in t.
struct ProblemSpec {
  std::function<double(double)> forcing;
  std::function<double(double theta, double t, double s)> kernel;
  std::function<double(double theta, double t, double s)> kernel_dt;
  double theta = 1.0;
  NoiseMode noise_mode = NoiseMode::additive_brownian;
  double lambda = 0.0;
  TimeGrid grid;
};

struct Trajectory {
  TimeGrid grid;
  std::vector<double> values;
};

struct Ensemble {
  std::vector<Trajectory> paths;
  Trajectory mean;
};

/// Raised when the forward recursion produces a non-finite value.
class NumericalBlowup : public std::runtime_error {
 public:
  NumericalBlowup(std::size_t node, std::ptrdiff_t path_index, const std::string& what)
      : std::runtime_error(what), node_(node), path_index_(path_index) {}

  std::size_t node() const noexcept { return node_; }
  /// -1 when the failure did not come from an ensemble member.
  std::ptrdiff_t path_index() const noexcept { return path_index_; }

 private:
  std::size_t node_;
  std::ptrdiff_t path_index_;
};

/// Seed of ensemble member `index`: splitmix64(splitmix64(master) + index).
std::uint64_t path_seed(std::uint64_t master, std::uint64_t index) noexcept;

BrownianPath sample_brownian(const TimeGrid& grid, std::uint64_t seed);

/// Closed-form Ito term per node: B_t, or B_t^2/2 - (t - t0)/2.
std::vector<double> ito_term(const BrownianPath& path, NoiseMode mode);

/// Left-point Riemann-Ito sum of B dB. Kept for testing the closed form.
std::vector<double> ito_left_point_sum(const BrownianPath& path);

/// Left-endpoint discretization of the Volterra operator with the kernel and
/// forcing tabulated once, so that many noise realizations can be pushed
/// through the same recursion.
class FdmOperator {
 public:
  explicit FdmOperator(const ProblemSpec& spec);

  const TimeGrid& grid() const noexcept { return grid_; }

  /// X_i = f_i + sum_{j<i} k_ij X_j dt + lambda * noise_i.
  Trajectory apply(std::span<const double> noise, double lambda,
                   std::ptrdiff_t path_index = -1) const;

 private:
  TimeGrid grid_;
  std::vector<double> forcing_;
  // Row i holds k(theta, t_i, t_j) * dt for j < i, rows packed back to back.
  std::vector<double> weights_;
};

Trajectory solve_fdm(const ProblemSpec& spec, const BrownianPath& path);

/// OpenMP-parallel over members; results merged in path-index order.
Ensemble simulate_ensemble(const ProblemSpec& spec, std::size_t n_paths, std::uint64_t seed);

/// Serial reference for simulate_ensemble. Bit-identical output.
Ensemble simulate_ensemble_serial(const ProblemSpec& spec, std::size_t n_paths,
                                  std::uint64_t seed);

Trajectory pointwise_mean(std::span<const Trajectory> paths);

struct Sample {
  double t;
  double value;
};

/// `count` points at indices round(j * n / (count - 1)).
std::vector<Sample> subsample_measurements(const Trajectory& traj, std::size_t count);

}  // namespace vie
