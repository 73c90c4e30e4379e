#include "vie/network.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace vie {

void MlpConfig::validate() const {
  if (widths.size() < 3) {
    throw std::invalid_argument("MlpConfig: need input, output and at least one hidden layer");
  }
  if (widths.front() != 1 || widths.back() != 2) {
    throw std::invalid_argument("MlpConfig: network maps one input to two outputs");
  }
  for (const auto w : widths) {
    if (w == 0) throw std::invalid_argument("MlpConfig: zero-width layer");
  }
}

std::size_t MlpConfig::parameter_count() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    n += widths[l] * widths[l + 1] + widths[l + 1];
  }
  return n + 1;
}

std::vector<double> ParameterSet::flatten() const {
  std::vector<double> flat;
  flat.reserve(config.parameter_count());
  for (const auto& layer : layers) {
    flat.insert(flat.end(), layer.weights.begin(), layer.weights.end());
    flat.insert(flat.end(), layer.biases.begin(), layer.biases.end());
  }
  flat.push_back(theta);
  return flat;
}

ParameterSet ParameterSet::unflatten(std::span<const double> flat, const MlpConfig& config) {
  config.validate();
  if (flat.size() != config.parameter_count()) {
    throw std::invalid_argument("unflatten: expected " + std::to_string(config.parameter_count()) +
                                " values, got " + std::to_string(flat.size()));
  }
  ParameterSet p;
  p.config = config;
  std::size_t k = 0;
  for (std::size_t l = 0; l + 1 < config.widths.size(); ++l) {
    DenseLayer layer;
    layer.in = config.widths[l];
    layer.out = config.widths[l + 1];
    layer.weights.assign(flat.begin() + k, flat.begin() + k + layer.in * layer.out);
    k += layer.in * layer.out;
    layer.biases.assign(flat.begin() + k, flat.begin() + k + layer.out);
    k += layer.out;
    p.layers.push_back(std::move(layer));
  }
  p.theta = flat[k];
  return p;
}

ParameterSet init_parameters(const MlpConfig& config) {
  config.validate();
  ParameterSet p;
  p.config = config;
  std::mt19937_64 rng(config.init_seed);
  for (std::size_t l = 0; l + 1 < config.widths.size(); ++l) {
    DenseLayer layer;
    layer.in = config.widths[l];
    layer.out = config.widths[l + 1];
    const double limit = std::sqrt(6.0 / static_cast<double>(layer.in + layer.out));
    std::uniform_real_distribution<double> uniform(-limit, limit);
    layer.weights.resize(layer.in * layer.out);
    for (auto& w : layer.weights) w = uniform(rng);
    layer.biases.assign(layer.out, 0.0);
    p.layers.push_back(std::move(layer));
  }
  p.theta = 0.0;
  return p;
}

BoundParameters bind_parameters(ad::Graph& graph, const ParameterSet& params) {
  return bind_parameters(graph, params.flatten());
}

BoundParameters bind_parameters(ad::Graph& graph, std::span<const double> flat) {
  BoundParameters bound;
  bound.slots.reserve(flat.size());
  for (std::size_t i = 0; i < flat.size(); ++i) {
    bound.slots.push_back(graph.variable(i, flat[i]));
  }
  bound.theta = bound.slots.back();
  return bound;
}

NetworkOutput forward(const MlpConfig& config, const BoundParameters& bound, ad::Expr t) {
  if (bound.slots.size() != config.parameter_count()) {
    throw std::invalid_argument("forward: bound parameters do not match the configuration");
  }
  ad::Graph& g = *t.graph();
  std::vector<ad::Expr> activation{t};
  std::vector<ad::Expr> next;
  std::size_t k = 0;
  const std::size_t n_layers = config.widths.size() - 1;
  for (std::size_t l = 0; l < n_layers; ++l) {
    const std::size_t in = config.widths[l];
    const std::size_t out = config.widths[l + 1];
    const std::size_t bias_offset = k + in * out;
    next.clear();
    for (std::size_t r = 0; r < out; ++r) {
      ad::Expr z = g.mul(bound.slots[k + r * in], activation[0]);
      for (std::size_t c = 1; c < in; ++c) {
        z = g.add(z, g.mul(bound.slots[k + r * in + c], activation[c]));
      }
      z = g.add(z, bound.slots[bias_offset + r]);
      next.push_back(l + 1 < n_layers ? g.tanh(z) : z);
    }
    k = bias_offset + out;
    activation.swap(next);
  }
  return {activation[0], activation[1]};
}

NetworkValue forward_value(const ParameterSet& params, double t) {
  std::vector<double> activation{t};
  std::vector<double> next;
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    const auto& layer = params.layers[l];
    next.assign(layer.out, 0.0);
    for (std::size_t r = 0; r < layer.out; ++r) {
      // same association order as the graph version
      double z = layer.weights[r * layer.in] * activation[0];
      for (std::size_t c = 1; c < layer.in; ++c) z += layer.weights[r * layer.in + c] * activation[c];
      z += layer.biases[r];
      next[r] = l + 1 < params.layers.size() ? std::tanh(z) : z;
    }
    activation.swap(next);
  }
  return {activation[0], activation[1]};
}

}  // namespace vie
