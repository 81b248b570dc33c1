#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "evoshift/dataset.hpp"
#include "evoshift/network.hpp"
#include "evoshift/optim.hpp"
#include "evoshift/perturb.hpp"
#include "evoshift/train.hpp"

namespace evoshift {

struct SurfacePoint {
  double alpha = 0.0;
  double train_loss = 0.0;
  double test_loss = 0.0;
  double train_acc = 0.0;
  double test_acc = 0.0;
};

/// Evaluates w = alpha * b + (1 - alpha) * a on `n_alphas` evenly spaced alphas
/// from 0 to 1 inclusive. By convention `a` is the SGD solution and `b` the
/// ADAM one.
std::vector<SurfacePoint> loss_surface(const Network& a, const Network& b, const LabeledDataset& ds_train,
                                       const LabeledDataset& ds_test, int n_alphas = 21);

void write_surface_table(std::ostream& out, const std::vector<SurfacePoint>& points);

struct ComparisonOptions {
  std::string arch;  // empty: reduced GrayNet for the dataset's class count
  int epochs = 30;
  std::size_t batch_size = 64;
  int repeats = 5;
  std::uint64_t seed = 0;
  bool augment = false;
  int threads = 1;
};

struct ComparisonRow {
  OptimizerKind optimizer = OptimizerKind::Sgd;
  int repeat = 0;
  double clean_test_acc = 0.0;
  double corrupted_train_acc = 0.0;
  TrainHistory history;
};

struct ComparisonAggregate {
  OptimizerKind optimizer = OptimizerKind::Sgd;
  double mean_clean_test_acc = 0.0;
  double std_clean_test_acc = 0.0;  // n-1 denominator, 0 for a single repeat
  double mean_corrupted_train_acc = 0.0;
  double std_corrupted_train_acc = 0.0;
};

struct ComparisonReport {
  std::vector<ComparisonRow> rows;
  std::vector<ComparisonAggregate> aggregates;
};

/// Sample mean and n-1 standard deviation.
std::pair<double, double> mean_and_std(const std::vector<double>& values);

std::vector<ComparisonAggregate> aggregate(const std::vector<ComparisonRow>& rows);

/// Seed shared by every optimizer in one repeat, so optimizers are compared on
/// identical initialisation and batch order.
std::uint64_t repeat_seed(std::uint64_t seed, int repeat);

/// Trains a fresh network per (optimizer, repeat) on apply(ds_train, pert) and
/// records clean-test and corrupted-train accuracy.
ComparisonReport optimizer_comparison(const LabeledDataset& ds_train, const LabeledDataset& ds_test,
                                      const PixelPerturbation& pert, const std::vector<OptimizerConfig>& optimizers,
                                      const ComparisonOptions& options);

void write_comparison_table(std::ostream& out, const ComparisonReport& report);

}  // namespace evoshift
