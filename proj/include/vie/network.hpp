#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "vie/autodiff.hpp"

namespace vie {

/// Fully connected network t -> (u, v): tanh on hidden layers, identity on
/// the output layer.
struct MlpConfig {
  std::vector<std::size_t> widths{1, 40, 40, 2};
  std::uint64_t init_seed = 0;

  void validate() const;
  /// Number of flattened slots, theta included.
  std::size_t parameter_count() const;
};

struct DenseLayer {
  std::size_t in = 0;
  std::size_t out = 0;
  std::vector<double> weights;  // out x in, row-major
  std::vector<double> biases;   // out

  friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

/// Network weights and biases plus the unknown equation parameter theta.
struct ParameterSet {
  MlpConfig config;
  std::vector<DenseLayer> layers;
  double theta = 0.0;

  /// Layer-major: weights row-major then biases per layer, theta last.
  std::vector<double> flatten() const;
  static ParameterSet unflatten(std::span<const double> flat, const MlpConfig& config);

  std::size_t theta_slot() const { return config.parameter_count() - 1; }

  friend bool operator==(const ParameterSet& a, const ParameterSet& b) {
    return a.config.widths == b.config.widths && a.layers == b.layers && a.theta == b.theta;
  }
};

/// Glorot-uniform weights, zero biases, theta = 0.
ParameterSet init_parameters(const MlpConfig& config);

struct NetworkOutput {
  ad::Expr u;
  ad::Expr v;
};

struct NetworkValue {
  double u = 0.0;
  double v = 0.0;
};

/// Parameters registered as graph variables; slot i is flattened entry i.
struct BoundParameters {
  std::vector<ad::Expr> slots;
  ad::Expr theta;
};

BoundParameters bind_parameters(ad::Graph& graph, const ParameterSet& params);
BoundParameters bind_parameters(ad::Graph& graph, std::span<const double> flat);

/// Builds the network expression for input `t` using bound parameters.
NetworkOutput forward(const MlpConfig& config, const BoundParameters& bound, ad::Expr t);

/// Plain double evaluation, no graph.
NetworkValue forward_value(const ParameterSet& params, double t);

}  // namespace vie
