#include "evoshift/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>

#include "evoshift/error.hpp"
#include "evoshift/fitness.hpp"
#include "evoshift/rng.hpp"
#include "parallel.hpp"

namespace evoshift {

std::vector<SurfacePoint> loss_surface(const Network& a, const Network& b, const LabeledDataset& ds_train,
                                       const LabeledDataset& ds_test, int n_alphas) {
  if (a.spec() != b.spec() || a.input_shape() != b.input_shape())
    throw Error(ErrorCode::ArchitectureMismatch, "checkpoints differ in architecture or input shape");
  if (n_alphas < 2) throw Error(ErrorCode::InvalidConfig, "need at least two alphas");

  Network mix = a;
  const auto wa = a.params();
  const auto wb = b.params();
  std::vector<SurfacePoint> points;
  points.reserve(static_cast<std::size_t>(n_alphas));
  for (int k = 0; k < n_alphas; ++k) {
    const double alpha = k == n_alphas - 1 ? 1.0 : static_cast<double>(k) / (n_alphas - 1);
    auto w = mix.params();
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = alpha * wb[i] + (1.0 - alpha) * wa[i];
    const auto tr = evaluate(mix, ds_train);
    const auto te = evaluate(mix, ds_test);
    points.push_back({alpha, tr.mean_loss, te.mean_loss, tr.accuracy, te.accuracy});
  }
  return points;
}

void write_surface_table(std::ostream& out, const std::vector<SurfacePoint>& points) {
  out << "alpha,train_loss,test_loss,train_acc,test_acc\n" << std::setprecision(17);
  for (const auto& p : points)
    out << p.alpha << ',' << p.train_loss << ',' << p.test_loss << ',' << p.train_acc << ',' << p.test_acc << '\n';
}

std::pair<double, double> mean_and_std(const std::vector<double>& values) {
  if (values.empty()) return {0.0, 0.0};
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  if (values.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / static_cast<double>(values.size() - 1))};
}

std::vector<ComparisonAggregate> aggregate(const std::vector<ComparisonRow>& rows) {
  std::vector<ComparisonAggregate> out;
  std::vector<OptimizerKind> kinds;
  for (const auto& r : rows)
    if (std::find(kinds.begin(), kinds.end(), r.optimizer) == kinds.end()) kinds.push_back(r.optimizer);
  for (auto kind : kinds) {
    std::vector<double> clean, corrupted;
    for (const auto& r : rows)
      if (r.optimizer == kind) {
        clean.push_back(r.clean_test_acc);
        corrupted.push_back(r.corrupted_train_acc);
      }
    const auto [cm, cs] = mean_and_std(clean);
    const auto [tm, ts] = mean_and_std(corrupted);
    out.push_back({kind, cm, cs, tm, ts});
  }
  return out;
}

std::uint64_t repeat_seed(std::uint64_t seed, int repeat) {
  return derive_seed(seed, {stream::kComparison, static_cast<std::uint64_t>(repeat)});
}

ComparisonReport optimizer_comparison(const LabeledDataset& ds_train, const LabeledDataset& ds_test,
                                      const PixelPerturbation& pert, const std::vector<OptimizerConfig>& optimizers,
                                      const ComparisonOptions& options) {
  if (options.repeats < 1) throw Error(ErrorCode::InvalidConfig, "repeats must be at least 1");
  if (optimizers.empty()) throw Error(ErrorCode::InvalidConfig, "no optimizers given");
  const auto corrupted = apply(ds_train, pert);
  const auto spec = parse_arch(options.arch.empty() ? default_surrogate_arch(ds_train.num_classes) : options.arch);
  const auto shape = ds_train.image_shape();

  const std::size_t cells = optimizers.size() * static_cast<std::size_t>(options.repeats);
  ComparisonReport report;
  report.rows.resize(cells);
  auto run_cell = [&](std::size_t cell) {
    const auto& opt = optimizers[cell / static_cast<std::size_t>(options.repeats)];
    const int repeat = static_cast<int>(cell % static_cast<std::size_t>(options.repeats));
    const auto seed = repeat_seed(options.seed, repeat);
    auto net = init_network(spec, shape, derive_seed(seed, {stream::kInit}));
    TrainOptions t;
    t.optimizer = opt;
    t.epochs = options.epochs;
    t.batch_size = options.batch_size;
    t.seed = derive_seed(seed, {stream::kSurrogate});
    t.augment = options.augment;
    auto& row = report.rows[cell];
    row.optimizer = opt.kind;
    row.repeat = repeat;
    row.history = train(net, corrupted, t);
    row.clean_test_acc = evaluate(net, ds_test).accuracy;
    row.corrupted_train_acc = evaluate(net, corrupted).accuracy;
  };

  detail::parallel_for(cells, options.threads, run_cell);
  report.aggregates = aggregate(report.rows);
  return report;
}

void write_comparison_table(std::ostream& out, const ComparisonReport& report) {
  out << "optimizer,repeat,clean_test_acc,corrupted_train_acc\n" << std::setprecision(17);
  for (const auto& r : report.rows)
    out << to_string(r.optimizer) << ',' << r.repeat << ',' << r.clean_test_acc << ',' << r.corrupted_train_acc
        << '\n';
}

}  // namespace evoshift
