#pragma once

#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace evoshift {

/// `<k>C<s>`: k filters of size s x s, stride 1, size-preserving zero padding, ReLU.
struct ConvSpec {
  int out_channels = 0;
  int kernel_size = 0;
  friend bool operator==(const ConvSpec&, const ConvSpec&) = default;
};

/// `P`: 2x2 max-pool, stride 2, floor semantics.
struct MaxPoolSpec {
  friend bool operator==(const MaxPoolSpec&, const MaxPoolSpec&) = default;
};

/// `<u>FC`: dense layer followed by ReLU.
struct FullyConnectedSpec {
  int out_units = 0;
  friend bool operator==(const FullyConnectedSpec&, const FullyConnectedSpec&) = default;
};

/// `<c>S`: dense layer to c logits followed by softmax. Always the last layer.
struct SoftmaxSpec {
  int num_classes = 0;
  friend bool operator==(const SoftmaxSpec&, const SoftmaxSpec&) = default;
};

using LayerSpec = std::variant<ConvSpec, MaxPoolSpec, FullyConnectedSpec, SoftmaxSpec>;

struct NetworkSpec {
  std::vector<LayerSpec> layers;

  int num_classes() const;
  friend bool operator==(const NetworkSpec&, const NetworkSpec&) = default;
};

/// Parses dash-separated strings such as "24C3-P-48C3-P-256FC-10S".
NetworkSpec parse_arch(std::string_view text);

/// Canonical string form; parse_arch(to_string(s)) == s.
std::string to_string(const NetworkSpec& spec);

}  // namespace evoshift
