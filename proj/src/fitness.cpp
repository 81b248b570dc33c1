#include "evoshift/fitness.hpp"

#include <chrono>
#include <cmath>
#include <numeric>
#include <ostream>
#include <random>

#include <json.hpp>

#include "evoshift/error.hpp"
#include "evoshift/rng.hpp"
#include "evoshift/train.hpp"
#include "parallel.hpp"

namespace evoshift {

std::string default_surrogate_arch(int num_classes) {
  return "8C3-P-16C3-P-64FC-" + std::to_string(num_classes) + "S";
}

void SearchConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::InvalidConfig, what); };
  if (num_pixels < 1) fail("num_pixels must be positive");
  if (population < 2) fail("population must be at least 2");
  if (generations < 1) fail("generations must be positive");
  if (!(sigma0 > 0.0)) fail("sigma0 must be positive");
  if (inner_epochs < 1 || discriminator_epochs < 1) fail("epochs must be positive");
  if (batch_size < 1 || train_subset < 2) fail("batch size and subset must be positive");
  if (!(discriminator_split > 0.0 && discriminator_split < 1.0)) fail("discriminator split must lie in (0,1)");
  if (threads < 1) fail("threads must be positive");
  inner_optimizer.validate();
}

std::string SearchConfig::surrogate_arch(int num_classes) const {
  return arch.empty() ? default_surrogate_arch(num_classes) : arch;
}

DiscriminatorOptions SearchConfig::discriminator() const {
  return {OptimizerConfig::defaults(inner_optimizer.kind), discriminator_epochs, batch_size};
}

double semantic_mismatch(const Network& net, const LabeledDataset& ds, const PixelPerturbation& p) {
  const auto corrupted = apply(ds, p);
  return evaluate(net, ds).mean_loss - evaluate(net, corrupted).mean_loss;
}

DivergenceResult domain_divergence(const LabeledDataset& clean, const LabeledDataset& corrupted, double split,
                                   std::uint64_t seed, const DiscriminatorOptions& options, bool flip_labels) {
  if (clean.empty() || corrupted.empty()) throw Error(ErrorCode::EmptyDataset, "divergence needs samples");
  if (clean.size() != corrupted.size() || clean.image_shape() != corrupted.image_shape())
    throw Error(ErrorCode::SizeMismatch, "clean and corrupted sets must be the same size and shape");
  if (!(split > 0.0 && split < 1.0)) throw Error(ErrorCode::InvalidConfig, "split must lie in (0,1)");
  const std::size_t pairs = clean.size();
  if (pairs < 2) throw Error(ErrorCode::EmptyDataset, "divergence needs at least two image pairs");

  // Pairs stay together so the held-out side never sees a train image's twin.
  std::vector<std::size_t> order(pairs);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(derive_seed(seed, {stream::kSubset}));
  std::shuffle(order.begin(), order.end(), rng);
  std::size_t held = static_cast<std::size_t>(std::llround(split * static_cast<double>(pairs)));
  held = std::clamp<std::size_t>(held, 1, pairs - 1);

  const auto shape = clean.image_shape();
  const int corrupted_label = flip_labels ? 1 : 0;
  const int clean_label = 1 - corrupted_label;
  auto build = [&](std::size_t begin, std::size_t end) {
    const std::size_t n = 2 * (end - begin);
    std::vector<double> pixels;
    pixels.reserve(n * shape.size());
    std::vector<int> labels;
    labels.reserve(n);
    for (std::size_t k = begin; k < end; ++k) {
      const auto a = corrupted.images.row(order[k]);
      pixels.insert(pixels.end(), a.begin(), a.end());
      labels.push_back(corrupted_label);
      const auto b = clean.images.row(order[k]);
      pixels.insert(pixels.end(), b.begin(), b.end());
      labels.push_back(clean_label);
    }
    return LabeledDataset{Tensor({n, shape.channels, shape.height, shape.width}, std::move(pixels)),
                          std::move(labels), 2};
  };
  const auto train_set = build(0, pairs - held);
  const auto held_set = build(pairs - held, pairs);

  auto disc = init_network(parse_arch("2S"), shape, derive_seed(seed, {stream::kInit}));
  std::fill(disc.params().begin(), disc.params().end(), 0.0);
  TrainOptions opts;
  opts.optimizer = options.optimizer;
  opts.epochs = options.epochs;
  opts.batch_size = options.batch_size;
  opts.seed = derive_seed(seed, {stream::kDiscriminator});
  train(disc, train_set, opts);

  DivergenceResult r;
  r.epsilon = 1.0 - evaluate(disc, held_set).accuracy;
  r.f_d = 1.0 - 2.0 * r.epsilon;
  r.d_a = 2.0 * (1.0 - 2.0 * r.epsilon);
  return r;
}

double generalization_gap(const Network& net, const LabeledDataset& clean_eval,
                          const LabeledDataset& corrupted_train) {
  const double clean_error = 1.0 - evaluate(net, clean_eval).accuracy;
  const double corrupted_error = 1.0 - evaluate(net, corrupted_train).accuracy;
  return clean_error - corrupted_error;
}

LabeledDataset search_subset(const LabeledDataset& ds_train, const SearchConfig& cfg) {
  return random_subset(ds_train, cfg.train_subset, derive_seed(cfg.master_seed, {stream::kSubset}));
}

std::uint64_t candidate_seed(const SearchConfig& cfg, std::uint64_t generation, std::uint64_t index) {
  return derive_seed(cfg.master_seed, {stream::kSurrogate, generation, index});
}

FitnessReport evaluate_candidate(const LabeledDataset& ds_train, const PerturbationGenome& genome,
                                 const SearchConfig& cfg, std::uint64_t seed) {
  const auto clean = search_subset(ds_train, cfg);
  if (genome.num_classes != clean.num_classes || genome.shape != clean.image_shape())
    throw Error(ErrorCode::ShapeMismatch, "genome metadata does not match the training set");
  const auto perturbation = decode(genome);
  const auto corrupted = apply(clean, perturbation);

  auto net = init_network(parse_arch(cfg.surrogate_arch(clean.num_classes)), clean.image_shape(),
                          derive_seed(seed, {stream::kInit}));
  TrainOptions opts;
  opts.optimizer = cfg.inner_optimizer;
  opts.epochs = cfg.inner_epochs;
  opts.batch_size = cfg.batch_size;
  opts.seed = derive_seed(seed, {stream::kSurrogate});
  const auto history = train(net, corrupted, opts);

  FitnessReport report;
  if (history.diverged) {
    report.diverged = true;
    report.f_m = kDivergedFitness;
    report.f_d = 0.0;
    report.f_total = report.f_m + report.f_d;
    return report;
  }
  report.surrogate_train_acc = history.epochs.back().train_accuracy;
  report.clean_train_loss = evaluate(net, clean).mean_loss;
  report.corrupted_train_loss = evaluate(net, corrupted).mean_loss;
  report.f_m = report.clean_train_loss - report.corrupted_train_loss;

  const auto div = domain_divergence(clean, corrupted, cfg.discriminator_split,
                                     derive_seed(seed, {stream::kDiscriminator}), cfg.discriminator());
  report.epsilon = div.epsilon;
  report.f_d = div.f_d;
  report.d_a = div.d_a;
  report.f_total = report.f_m + report.f_d;
  if (!std::isfinite(report.f_total)) {
    report.diverged = true;
    report.f_m = kDivergedFitness;
    report.f_d = 0.0;
    report.f_total = report.f_m + report.f_d;
  }
  return report;
}

SearchResult mdd_es_search(const LabeledDataset& ds_train, const LabeledDataset* ds_test_clean,
                           const SearchConfig& cfg, const std::function<void(const GenerationLog&)>& on_generation) {
  cfg.validate();
  ds_train.validate();
  const auto shape = ds_train.image_shape();
  const int classes = ds_train.num_classes;
  const auto subset = search_subset(ds_train, cfg);

  const auto start = baseline_uniform(classes, cfg.num_pixels, shape, derive_seed(cfg.master_seed, {stream::kInit}));
  const auto m0 = encode(start);
  auto state = es_init(static_cast<int>(m0.vector.size()), m0.vector, cfg.sigma0, cfg.population,
                       derive_seed(cfg.master_seed, {stream::kSampling}));

  SearchResult result;
  std::optional<FitnessReport> best_report;
  PerturbationGenome genome{{}, classes, cfg.num_pixels, shape};

  for (int gen = 0; gen < cfg.generations; ++gen) {
    const auto t0 = std::chrono::steady_clock::now();
    auto candidates = es_ask(state);
    std::vector<FitnessReport> reports(candidates.size());
    detail::parallel_for(candidates.size(), cfg.threads, [&](std::size_t j) {
      PerturbationGenome g{candidates[j].vector, classes, cfg.num_pixels, shape};
      reports[j] = evaluate_candidate(subset, g, cfg, candidate_seed(cfg, static_cast<std::uint64_t>(gen), j));
    });

    GenerationLog log;
    log.generation = gen;
    std::size_t top = 0;
    double sum = 0.0;
    for (std::size_t j = 0; j < candidates.size(); ++j) {
      candidates[j].fitness = reports[j].f_total;
      sum += reports[j].f_total;
      if (reports[j].diverged) ++log.diverged;
      if (reports[j].f_total > reports[top].f_total) top = j;
    }
    es_tell(state, candidates);
    if (!best_report || reports[top].f_total > best_report->f_total) {
      best_report = reports[top];
      genome.vector = candidates[top].vector;
      result.best_genome = genome;
    }

    log.best_f_total = reports[top].f_total;
    log.mean_f_total = sum / static_cast<double>(candidates.size());
    log.elitist_f_total = best_report->f_total;
    log.best_f_m = reports[top].f_m;
    log.best_f_d = reports[top].f_d;
    log.best_epsilon = reports[top].epsilon;
    log.sigma = state.sigma;
    if (cfg.log_test_accuracy && ds_test_clean) {
      const auto gen_best = decode({candidates[top].vector, classes, cfg.num_pixels, shape});
      const std::uint64_t seed = derive_seed(cfg.master_seed, {stream::kDiagnostic, static_cast<std::uint64_t>(gen)});
      auto net = init_network(parse_arch(cfg.surrogate_arch(classes)), shape, derive_seed(seed, {stream::kInit}));
      TrainOptions opts;
      opts.optimizer = cfg.inner_optimizer;
      opts.epochs = cfg.inner_epochs;
      opts.batch_size = cfg.batch_size;
      opts.seed = seed;
      train(net, apply(subset, gen_best), opts);
      log.test_accuracy = evaluate(net, *ds_test_clean).accuracy;
    }
    log.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    result.logs.push_back(log);
    if (on_generation) on_generation(log);
  }

  result.best_report = *best_report;
  result.best = decode(result.best_genome);
  return result;
}

void write_generation_log(std::ostream& out, const GenerationLog& log) {
  nlohmann::json line = {{"generation", log.generation},
                         {"best_f_total", log.best_f_total},
                         {"mean_f_total", log.mean_f_total},
                         {"elitist_f_total", log.elitist_f_total},
                         {"best_f_m", log.best_f_m},
                         {"best_f_d", log.best_f_d},
                         {"best_epsilon", log.best_epsilon},
                         {"diverged", log.diverged},
                         {"sigma", log.sigma},
                         {"wall_ms", log.wall_ms}};
  if (log.test_accuracy) line["test_accuracy_diagnostic"] = *log.test_accuracy;
  out << line.dump() << '\n';
}

}  // namespace evoshift
