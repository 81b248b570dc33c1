#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "evoshift/dataset.hpp"
#include "evoshift/network.hpp"
#include "evoshift/optim.hpp"

namespace evoshift {

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double train_accuracy = 0.0;
  std::optional<double> eval_accuracy;
  double wall_ms = 0.0;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
  /// Set when a batch loss became non-finite; training stops at that point.
  bool diverged = false;
};

struct TrainOptions {
  OptimizerConfig optimizer;
  int epochs = 5;
  std::size_t batch_size = 64;
  std::uint64_t seed = 0;
  /// Random integer shift of up to +-max_shift pixels per presentation, zero fill.
  bool augment = false;
  int max_shift = 2;
  /// Reported per epoch as eval_accuracy when set. Never used for updates.
  const LabeledDataset* eval = nullptr;
};

/// Mini-batch training on a per-epoch shuffle of `ds` (last partial batch kept).
TrainHistory train(Network& net, const LabeledDataset& ds, const TrainOptions& options);

/// Shifts every (c, h, w) image by (dy, dx) with zero fill.
void shift_image(std::span<const double> src, std::span<double> dst, ImageShape shape, int dy, int dx);

/// One JSON object per line: epoch, train_loss, train_acc, eval_acc (when present), wall_ms.
void write_history(std::ostream& out, const TrainHistory& history);

}  // namespace evoshift
