#pragma once

#include <cstdint>
#include <utility>

#include "evoshift/dataset.hpp"

namespace evoshift {

/// Desk-scale stand-in for MNIST-like data: every class owns a smoothed random
/// template and a sample is background + amplitude * template + Gaussian pixel
/// noise, clipped to [0,1]. The dark background leaves saturated pixels rare.
struct SynthConfig {
  std::uint64_t seed = 0;
  int classes = 2;
  std::size_t train_per_class = 500;
  std::size_t test_per_class = 250;
  ImageShape shape{1, 8, 8};
  double background = 0.1;
  double template_amplitude = 0.15;
  double noise = 0.1;
};

/// Returns (train, test). Labels cycle 0, 1, ..., classes-1.
std::pair<LabeledDataset, LabeledDataset> synth_dataset(const SynthConfig& cfg);

}  // namespace evoshift
