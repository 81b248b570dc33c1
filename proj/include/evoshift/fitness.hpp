#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "evoshift/cmaes.hpp"
#include "evoshift/dataset.hpp"
#include "evoshift/network.hpp"
#include "evoshift/optim.hpp"
#include "evoshift/perturb.hpp"

namespace evoshift {

/// Scores of one candidate perturbation. f_total == f_m + f_d and
/// d_a == 2 * (1 - 2 * epsilon) hold exactly.
struct FitnessReport {
  double f_m = 0.0;
  double f_d = 0.0;
  double f_total = 0.0;
  double epsilon = 0.5;
  double d_a = 0.0;
  double clean_train_loss = 0.0;
  double corrupted_train_loss = 0.0;
  double surrogate_train_acc = 0.0;
  bool diverged = false;
};

/// Fitness assigned to candidates whose surrogate training produced a
/// non-finite loss.
inline constexpr double kDivergedFitness = -1e6;

struct DiscriminatorOptions {
  OptimizerConfig optimizer = OptimizerConfig::defaults(OptimizerKind::Adam);
  int epochs = 10;
  std::size_t batch_size = 64;
};

struct DivergenceResult {
  double epsilon = 0.5;
  double f_d = 0.0;
  double d_a = 0.0;
};

/// Reduced GrayNet used as the default surrogate: "8C3-P-16C3-P-64FC-<c>S".
std::string default_surrogate_arch(int num_classes);

struct SearchConfig {
  int num_pixels = 1;
  int population = 8;
  int generations = 15;
  double sigma0 = 1.0;
  std::string arch;  // empty: default_surrogate_arch
  OptimizerConfig inner_optimizer = OptimizerConfig::defaults(OptimizerKind::Adam);
  int inner_epochs = 5;
  std::size_t batch_size = 64;
  std::size_t train_subset = 2000;
  double discriminator_split = 0.2;  // held-out fraction
  int discriminator_epochs = 10;
  std::uint64_t master_seed = 0;
  int threads = 1;
  /// Train a fresh surrogate on each generation's best and report its clean
  /// test accuracy. Diagnostic only; never fed back into the search.
  bool log_test_accuracy = false;

  void validate() const;
  std::string surrogate_arch(int num_classes) const;
  DiscriminatorOptions discriminator() const;
};

struct GenerationLog {
  int generation = 0;
  double best_f_total = 0.0;
  double mean_f_total = 0.0;
  double elitist_f_total = 0.0;
  double best_f_m = 0.0;
  double best_f_d = 0.0;
  double best_epsilon = 0.0;
  int diverged = 0;
  double sigma = 0.0;
  std::optional<double> test_accuracy;
  double wall_ms = 0.0;
};

struct SearchResult {
  PixelPerturbation best;
  PerturbationGenome best_genome;
  FitnessReport best_report;
  std::vector<GenerationLog> logs;
};

/// Mean CE on the clean set minus mean CE on apply(ds, p), both under `net`.
double semantic_mismatch(const Network& net, const LabeledDataset& ds, const PixelPerturbation& p);

/// Trains a zero-initialised linear softmax discriminator to separate
/// corrupted (label 0) from clean (label 1) images and measures its error on a
/// held-out fraction `split` of the image pairs. `flip_labels` swaps the two
/// labels.
DivergenceResult domain_divergence(const LabeledDataset& clean, const LabeledDataset& corrupted, double split,
                                   std::uint64_t seed, const DiscriminatorOptions& options = {},
                                   bool flip_labels = false);

/// Clean error rate minus corrupted-train error rate.
double generalization_gap(const Network& net, const LabeledDataset& clean_eval,
                          const LabeledDataset& corrupted_train);

/// The training subset every candidate of a search is scored on.
LabeledDataset search_subset(const LabeledDataset& ds_train, const SearchConfig& cfg);

/// Trains a surrogate from scratch on the corrupted subset and scores it.
/// Pure in (inputs, candidate_seed).
FitnessReport evaluate_candidate(const LabeledDataset& ds_train, const PerturbationGenome& genome,
                                 const SearchConfig& cfg, std::uint64_t candidate_seed);

/// Seed of candidate `index` in generation `generation`.
std::uint64_t candidate_seed(const SearchConfig& cfg, std::uint64_t generation, std::uint64_t index);

/// CMA-ES over perturbation genomes maximising f_total, started from the
/// uniform baseline. ds_test_clean is only read for diagnostic logging.
SearchResult mdd_es_search(const LabeledDataset& ds_train, const LabeledDataset* ds_test_clean,
                           const SearchConfig& cfg,
                           const std::function<void(const GenerationLog&)>& on_generation = {});

void write_generation_log(std::ostream& out, const GenerationLog& log);

}  // namespace evoshift
