#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "evoshift/arch.hpp"
#include "evoshift/dataset.hpp"
#include "evoshift/tensor.hpp"

namespace evoshift {

/// Placement of one layer inside the flat parameter vector.
struct LayerPlan {
  LayerSpec spec;
  ImageShape in;
  ImageShape out;
  std::size_t weight_offset = 0;
  std::size_t weight_count = 0;
  std::size_t bias_offset = 0;
  std::size_t bias_count = 0;
  std::size_t fan_in = 0;
};

/// Computes the layer partition; throws ShapeUnderflow if pooling reaches 0.
std::vector<LayerPlan> plan_layers(const NetworkSpec& spec, ImageShape input);

std::size_t parameter_count(const NetworkSpec& spec, ImageShape input);

struct BatchStats {
  double mean_loss = 0.0;
  std::size_t correct = 0;
  std::size_t count = 0;
};

/// Feed-forward classifier over a fixed layer set. Parameters and gradients
/// live in two flat vectors partitioned by plan(). A Network is single-writer;
/// the const members are safe to call concurrently.
class Network {
 public:
  Network(NetworkSpec spec, ImageShape input, std::uint64_t seed);

  const NetworkSpec& spec() const noexcept { return spec_; }
  ImageShape input_shape() const noexcept { return input_; }
  std::uint64_t seed() const noexcept { return seed_; }
  int num_classes() const noexcept { return num_classes_; }
  const std::vector<LayerPlan>& plan() const noexcept { return plan_; }

  std::span<double> params() noexcept { return params_; }
  std::span<const double> params() const noexcept { return params_; }
  std::span<double> grads() noexcept { return grads_; }
  std::span<const double> grads() const noexcept { return grads_; }

  /// Replaces the parameter vector (length must match).
  void set_params(std::span<const double> values);

  /// (n, num_classes) class probabilities for a batch of shape (n, c, h, w).
  Tensor forward(const Tensor& batch) const;

  /// Overwrites grads() with the gradient of mean cross-entropy over the batch.
  BatchStats backward(const Tensor& batch, std::span<const int> labels);

 private:
  NetworkSpec spec_;
  ImageShape input_;
  std::uint64_t seed_;
  int num_classes_;
  std::vector<LayerPlan> plan_;
  std::vector<double> params_;
  std::vector<double> grads_;
};

/// Fan-in scaled uniform weights (bound sqrt(6/fan_in)), zero biases.
Network init_network(const NetworkSpec& spec, ImageShape input, std::uint64_t seed);

inline constexpr double kProbabilityFloor = 1e-12;

/// Mean of -log(max(p[label], 1e-12)).
double cross_entropy(const Tensor& probs, std::span<const int> labels);

/// Index of the largest entry; ties go to the lowest index.
int argmax(std::span<const double> row);

struct Evaluation {
  double accuracy = 0.0;
  double mean_loss = 0.0;
};

Evaluation evaluate(const Network& net, const LabeledDataset& ds);

}  // namespace evoshift
