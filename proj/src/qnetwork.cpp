#include "jppo/qnetwork.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "jppo/errors.hpp"

namespace jppo::agent {

QNetwork::QNetwork(std::vector<std::size_t> layer_sizes) : sizes_(std::move(layer_sizes)) {
  if (sizes_.size() < 2) throw DomainError("a network needs at least input and output sizes");
  for (std::size_t s : sizes_) {
    if (s == 0) throw DomainError("layer sizes must be positive");
  }
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    DenseLayer layer;
    layer.inputs = sizes_[l];
    layer.outputs = sizes_[l + 1];
    layer.weights.assign(layer.inputs * layer.outputs, 0.0);
    layer.bias.assign(layer.outputs, 0.0);
    layers_.push_back(std::move(layer));
  }
}

QNetwork QNetwork::initialized(std::vector<std::size_t> layer_sizes, Rng& rng) {
  QNetwork net(std::move(layer_sizes));
  for (auto& layer : net.layers_) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(layer.inputs));
    for (double& w : layer.weights) w = (2.0 * rng.uniform() - 1.0) * bound;
    for (double& b : layer.bias) b = (2.0 * rng.uniform() - 1.0) * bound;
  }
  return net;
}

QNetwork::Activations QNetwork::forward_cached(std::span<const double> state) const {
  if (state.size() != input_size()) {
    throw DomainError("state has " + std::to_string(state.size()) + " features, network expects " +
                      std::to_string(input_size()));
  }
  for (double x : state) {
    if (!std::isfinite(x)) throw DomainError("non-finite state feature");
  }
  Activations acts;
  acts.a.emplace_back(state.begin(), state.end());
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& layer = layers_[l];
    const auto& in = acts.a.back();
    std::vector<double> z(layer.outputs);
    for (std::size_t o = 0; o < layer.outputs; ++o) {
      double sum = layer.bias[o];
      const double* row = &layer.weights[o * layer.inputs];
      for (std::size_t i = 0; i < layer.inputs; ++i) sum += row[i] * in[i];
      z[o] = sum;
    }
    std::vector<double> a = z;
    if (l + 1 < layers_.size()) {
      for (double& v : a) v = v > 0.0 ? v : 0.0;
    }
    acts.z.push_back(std::move(z));
    acts.a.push_back(std::move(a));
  }
  return acts;
}

std::vector<double> QNetwork::forward(std::span<const double> state) const {
  return std::move(forward_cached(state).a.back());
}

std::size_t QNetwork::parameter_count() const {
  std::size_t n = 0;
  for (const auto& layer : layers_) n += layer.weights.size() + layer.bias.size();
  return n;
}

std::vector<double> QNetwork::parameters() const {
  std::vector<double> flat;
  flat.reserve(parameter_count());
  for (const auto& layer : layers_) {
    flat.insert(flat.end(), layer.weights.begin(), layer.weights.end());
    flat.insert(flat.end(), layer.bias.begin(), layer.bias.end());
  }
  return flat;
}

void QNetwork::set_parameters(std::span<const double> flat) {
  if (flat.size() != parameter_count()) throw DomainError("parameter vector has the wrong size");
  std::size_t k = 0;
  for (auto& layer : layers_) {
    for (double& w : layer.weights) w = flat[k++];
    for (double& b : layer.bias) b = flat[k++];
  }
}

bool operator==(const QNetwork& a, const QNetwork& b) {
  if (a.sizes_ != b.sizes_) return false;
  for (std::size_t l = 0; l < a.layers_.size(); ++l) {
    if (a.layers_[l].weights != b.layers_[l].weights || a.layers_[l].bias != b.layers_[l].bias) {
      return false;
    }
  }
  return true;
}

Gradients::Gradients(const QNetwork& net) : layers(net.layers()) { zero(); }

void Gradients::zero() {
  for (auto& layer : layers) {
    std::fill(layer.weights.begin(), layer.weights.end(), 0.0);
    std::fill(layer.bias.begin(), layer.bias.end(), 0.0);
  }
}

std::vector<double> Gradients::flatten() const {
  std::vector<double> flat;
  for (const auto& layer : layers) {
    flat.insert(flat.end(), layer.weights.begin(), layer.weights.end());
    flat.insert(flat.end(), layer.bias.begin(), layer.bias.end());
  }
  return flat;
}

void accumulate_output_gradient(const QNetwork& net, const QNetwork::Activations& acts,
                                std::size_t output, double upstream, Gradients& grads) {
  const auto& layers = net.layers();
  const std::size_t depth = layers.size();
  // delta holds dL/dz for the current layer.
  std::vector<double> delta(layers.back().outputs, 0.0);
  delta[output] = upstream;
  for (std::size_t l = depth; l-- > 0;) {
    const auto& layer = layers[l];
    auto& g = grads.layers[l];
    const auto& in = acts.a[l];
    for (std::size_t o = 0; o < layer.outputs; ++o) {
      const double d = delta[o];
      if (d == 0.0) continue;
      g.bias[o] += d;
      double* row = &g.weights[o * layer.inputs];
      for (std::size_t i = 0; i < layer.inputs; ++i) row[i] += d * in[i];
    }
    if (l == 0) break;
    std::vector<double> prev(layer.inputs, 0.0);
    for (std::size_t o = 0; o < layer.outputs; ++o) {
      const double d = delta[o];
      if (d == 0.0) continue;
      const double* row = &layer.weights[o * layer.inputs];
      for (std::size_t i = 0; i < layer.inputs; ++i) prev[i] += row[i] * d;
    }
    const auto& z_prev = acts.z[l - 1];
    for (std::size_t i = 0; i < prev.size(); ++i) {
      if (!(z_prev[i] > 0.0)) prev[i] = 0.0;
    }
    delta = std::move(prev);
  }
}

}  // namespace jppo::agent
