#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "jppo/rng.hpp"

namespace jppo::agent {

// Fully connected layer, weights stored row-major as [out][in].
struct DenseLayer {
  std::size_t inputs = 0;
  std::size_t outputs = 0;
  std::vector<double> weights;
  std::vector<double> bias;

  double& w(std::size_t o, std::size_t i) { return weights[o * inputs + i]; }
  double w(std::size_t o, std::size_t i) const { return weights[o * inputs + i]; }
};

// Multilayer perceptron with rectifier hidden layers and a linear output layer.
class QNetwork {
 public:
  QNetwork() = default;
  // Zero-initialised network with the given layer sizes (input first).
  explicit QNetwork(std::vector<std::size_t> layer_sizes);
  // Weights and biases uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)].
  static QNetwork initialized(std::vector<std::size_t> layer_sizes, Rng& rng);

  std::size_t input_size() const { return sizes_.front(); }
  std::size_t output_size() const { return sizes_.back(); }
  const std::vector<std::size_t>& layer_sizes() const noexcept { return sizes_; }
  std::vector<DenseLayer>& layers() noexcept { return layers_; }
  const std::vector<DenseLayer>& layers() const noexcept { return layers_; }

  // Throws DomainError for a wrong-sized or non-finite input.
  std::vector<double> forward(std::span<const double> state) const;

  // Pre-activations (z) and activations (a) of every layer, a[0] = input.
  struct Activations {
    std::vector<std::vector<double>> z;
    std::vector<std::vector<double>> a;
  };
  Activations forward_cached(std::span<const double> state) const;

  std::size_t parameter_count() const;
  // Flat view in layer order: weights then bias for each layer.
  std::vector<double> parameters() const;
  void set_parameters(std::span<const double> flat);

  bool same_shape(const QNetwork& other) const { return sizes_ == other.sizes_; }
  friend bool operator==(const QNetwork& a, const QNetwork& b);

 private:
  std::vector<std::size_t> sizes_;
  std::vector<DenseLayer> layers_;
};

// Gradient buffers shaped like a QNetwork's layers.
struct Gradients {
  std::vector<DenseLayer> layers;

  explicit Gradients(const QNetwork& net);
  void zero();
  std::vector<double> flatten() const;
};

// Adds d(out)/d(theta) scaled by `upstream` for one output unit of one sample.
void accumulate_output_gradient(const QNetwork& net, const QNetwork::Activations& acts,
                                std::size_t output, double upstream, Gradients& grads);

}  // namespace jppo::agent
