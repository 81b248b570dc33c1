#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "evoshift/tensor.hpp"

namespace evoshift {

struct ImageShape {
  std::size_t channels = 1;
  std::size_t height = 1;
  std::size_t width = 1;

  std::size_t pixels() const noexcept { return height * width; }
  std::size_t size() const noexcept { return channels * height * width; }
  friend bool operator==(const ImageShape&, const ImageShape&) = default;
};

/// Images of shape (n, channels, height, width) with pixels in [0,1] and one
/// label in [0, num_classes) per image.
struct LabeledDataset {
  Tensor images;
  std::vector<int> labels;
  int num_classes = 0;

  std::size_t size() const noexcept { return labels.size(); }
  bool empty() const noexcept { return labels.empty(); }
  ImageShape image_shape() const;

  /// Throws ShapeMismatch / CountMismatch / SizeMismatch on violated invariants.
  void validate() const;

  friend bool operator==(const LabeledDataset&, const LabeledDataset&) = default;
};

LabeledDataset make_dataset(ImageShape shape, std::vector<double> pixels, std::vector<int> labels,
                            int num_classes);

/// Rows picked in the given order (duplicates allowed).
LabeledDataset select(const LabeledDataset& ds, std::span<const std::size_t> indices);

/// First `count` rows of a seed-derived permutation; the whole set when count >= size.
LabeledDataset random_subset(const LabeledDataset& ds, std::size_t count, std::uint64_t seed);

std::vector<double> class_frequencies(const LabeledDataset& ds);

}  // namespace evoshift
