#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "vie/cases.hpp"
#include "vie/simulator.hpp"

namespace vie {

/// Offsets added to a master seed so the fitting ensemble, the prediction
/// ensemble and the truth paths never share Brownian increments.
inline constexpr std::uint64_t kFitStream = 0;
inline constexpr std::uint64_t kPredictStream = 1ULL << 32;
inline constexpr std::uint64_t kTruthStream = 2ULL << 32;

struct ConfidenceBand {
  TimeGrid grid;
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<double> mean;
  double level = 0.95;
};

struct PredictOptions {
  std::size_t n_paths = 1000;
  std::size_t n_steps = 250;  // subintervals of the horizon
  double level = 0.95;
};

/// Type-7 quantile (linear interpolation between order statistics) of
/// already sorted values. p in [0, 1].
double empirical_quantile(std::span<const double> sorted, double p);

/// Simulates from the case's t0 through horizon_end with dt = horizon width /
/// n_steps, then reports pointwise quantiles on the horizon nodes. Throws
/// std::invalid_argument when the horizon does not start on a grid node at or
/// after t0.
ConfidenceBand predict_band(const CaseDefinition& c, double theta_hat, double lambda,
                            double horizon_start, double horizon_end, const PredictOptions& options,
                            std::uint64_t seed);

/// Pointwise band over `horizon`, a contiguous run of nodes of the ensemble
/// grid starting at `first_node`. Parallel over nodes.
ConfidenceBand band_from_ensemble(const Ensemble& ensemble, std::size_t first_node,
                                  const TimeGrid& horizon, double level);

/// Serial reference for band_from_ensemble.
ConfidenceBand band_from_ensemble_serial(const Ensemble& ensemble, std::size_t first_node,
                                         const TimeGrid& horizon, double level);

/// Fresh trajectories of the true process (theta = case.true_theta) on
/// [t0, t_end] with n_steps subintervals.
std::vector<Trajectory> simulate_truth(const CaseDefinition& c, double lambda, double t_end,
                                       std::size_t n_steps, std::size_t n_paths,
                                       std::uint64_t seed);

/// Linear interpolation of a trajectory at t. Throws std::out_of_range
/// outside the trajectory's grid.
double interpolate(const Trajectory& traj, double t);

struct CoverageReport {
  std::vector<double> per_trajectory;
  double overall = 0.0;
  std::size_t nodes_checked = 0;
  bool pass = false;         // overall >= level
  bool strict_pass = false;  // every node of every trajectory inside
};

/// Band nodes outside a truth trajectory's time range are skipped; a
/// trajectory with no overlap at all raises std::invalid_argument.
CoverageReport coverage_check(const ConfidenceBand& band, std::span<const Trajectory> truth);

}  // namespace vie
