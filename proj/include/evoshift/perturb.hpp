#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "evoshift/dataset.hpp"

namespace evoshift {

/// Continuous search vector. For each class c and pixel slot k the block at
/// (c * num_pixels + k) * (2 + channels) holds (row, col, delta_0 .. delta_{C-1}).
struct PerturbationGenome {
  std::vector<double> vector;
  int num_classes = 0;
  int num_pixels = 0;
  ImageShape shape;

  static std::size_t length(int num_classes, int num_pixels, ImageShape shape) {
    return static_cast<std::size_t>(num_classes) * static_cast<std::size_t>(num_pixels) * (2 + shape.channels);
  }
  void validate() const;
};

struct PixelEdit {
  int row = 0;
  int col = 0;
  std::vector<double> delta;  // one per channel, each in [-1, 1]
  friend bool operator==(const PixelEdit&, const PixelEdit&) = default;
};

/// Class-wise pixel edits: classes[c] holds at most num_pixels entries with
/// distinct in-bounds coordinates.
struct PixelPerturbation {
  int num_classes = 0;
  int num_pixels = 0;
  ImageShape shape;
  std::vector<std::vector<PixelEdit>> classes;

  void validate() const;
  friend bool operator==(const PixelPerturbation&, const PixelPerturbation&) = default;
};

/// Rounds and clamps coordinates, clamps deltas to [-1,1], merges duplicate
/// coordinates within a class (the later slot's delta wins, position of the
/// first occurrence is kept).
PixelPerturbation decode(const PerturbationGenome& genome);

/// Inverse of decode on integer coordinates and in-range deltas. Classes with
/// fewer than num_pixels entries repeat their last entry.
PerturbationGenome encode(const PixelPerturbation& p);

/// Adds each image's own class edits and clips to [0,1]. Pure.
LabeledDataset apply(const LabeledDataset& ds, const PixelPerturbation& p);

/// Identity perturbation: every class edits (0,0) by zero.
PixelPerturbation zero_perturbation(int num_classes, int num_pixels, ImageShape shape);

/// Per class, num_pixels distinct coordinates drawn uniformly without
/// replacement and deltas uniform in [-1,1].
PixelPerturbation baseline_uniform(int num_classes, int num_pixels, ImageShape shape, std::uint64_t seed);

/// Class c saturates column 0 at rows c*num_pixels .. c*num_pixels+num_pixels-1.
PixelPerturbation baseline_column(int num_classes, int num_pixels, ImageShape shape);

inline constexpr int kPerturbationFileVersion = 1;

void save_perturbation(const PixelPerturbation& p, const std::filesystem::path& path);
PixelPerturbation load_perturbation(const std::filesystem::path& path);

}  // namespace evoshift
