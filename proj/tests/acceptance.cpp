// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "evoshift/checkpoint.hpp"
#include "evoshift/cli.hpp"
#include "evoshift/cmaes.hpp"
#include "evoshift/experiments.hpp"
#include "evoshift/fitness.hpp"
#include "evoshift/perturb.hpp"
#include "evoshift/rng.hpp"
#include "evoshift/synth.hpp"
#include "evoshift/train.hpp"
#include "gradcheck.hpp"

using namespace evoshift;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
  bool pass = false;
  std::string summary;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// ---------------------------------------------------------------- 1

std::string random_arch(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> width(1, 3);
  std::uniform_int_distribution<int> kernel(0, 1);
  std::uniform_int_distribution<int> coin(0, 1);
  std::string arch = std::to_string(width(rng)) + "C" + (kernel(rng) ? "3" : "1") + "-P";
  if (coin(rng)) arch += "-" + std::to_string(width(rng)) + "C3";
  arch += "-" + std::to_string(width(rng) + 1) + "FC";
  if (coin(rng)) arch += "-" + std::to_string(width(rng) + 1) + "FC";
  arch += "-" + std::to_string(width(rng) + 1) + "S";
  return arch;
}

Outcome gradient_oracle() {
  const auto start = Clock::now();
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<std::size_t> channels(1, 2), side(4, 6), batch(2, 4);
  std::uniform_real_distribution<double> unit(0.0, 1.0), bias(-0.1, 0.1);
  double worst = 0.0;
  std::size_t checked = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const auto spec = parse_arch(random_arch(rng));
    const ImageShape shape{channels(rng), side(rng), side(rng)};
    auto net = init_network(spec, shape, rng());
    for (const auto& p : net.plan())
      for (std::size_t i = 0; i < p.bias_count; ++i) net.params()[p.bias_offset + i] = bias(rng);
    const std::size_t n = batch(rng);
    Tensor x({n, shape.channels, shape.height, shape.width});
    for (auto& v : x.vec()) v = unit(rng);
    std::vector<int> y(n);
    for (auto& v : y) v = static_cast<int>(rng() % static_cast<std::uint64_t>(net.num_classes()));
    net.backward(x, y);
    const std::vector<double> analytic(net.grads().begin(), net.grads().end());
    const auto numeric = oracle::numeric_gradient(net, x, y, 1e-5);
    for (std::size_t i = 0; i < analytic.size(); ++i)
      worst = std::max(worst, oracle::relative_error(analytic[i], numeric[i]));
    checked += analytic.size();
  }
  const double secs = seconds_since(start);
  return {worst < 1e-4 && secs < 60.0, std::to_string(checked) + " parameters over 20 networks, worst relative error " +
                                           fmt("%.2e", worst) + ", " + fmt("%.1f", secs) + " s"};
}

// ---------------------------------------------------------------- 2

double sphere(const std::vector<double>& x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return -s;
}

double rosenbrock(const std::vector<double>& x) {
  const double a = x[1] - x[0] * x[0];
  const double b = 1.0 - x[0];
  return -(100.0 * a * a + b * b);
}

double run_es(EsState& s, const std::function<double(const std::vector<double>&)>& f, int generations) {
  for (int g = 0; g < generations; ++g) {
    auto pop = es_ask(s);
    for (auto& c : pop) c.fitness = f(c.vector);
    es_tell(s, pop);
  }
  return *es_best(s).fitness;
}

Outcome cmaes_oracles() {
  const auto start = Clock::now();
  std::vector<double> m5(5, 3.0);
  auto s = es_init(5, m5, 1.0, std::nullopt, 0);
  const double sphere_best = run_es(s, sphere, 200);

  std::vector<double> m2 = {-1.0, 1.0};
  auto r = es_init(2, m2, 0.5, std::nullopt, 0);
  const double rosen_best = run_es(r, rosenbrock, 1500);

  auto a = es_init(5, m5, 1.0, std::nullopt, 7);
  auto b = a;
  bool ranking = true;
  for (int g = 0; g < 50 && ranking; ++g) {
    auto pa = es_ask(a);
    auto pb = es_ask(b);
    for (auto& c : pa) c.fitness = sphere(c.vector);
    for (auto& c : pb) c.fitness = 2.0 * sphere(c.vector) + 7.0;
    es_tell(a, pa);
    es_tell(b, pb);
    ranking = a.mean == b.mean && a.sigma == b.sigma && a.cov == b.cov;
  }

  auto d1 = es_init(5, m5, 1.0, std::nullopt, 11);
  auto d2 = es_init(5, m5, 1.0, std::nullopt, 11);
  run_es(d1, sphere, 50);
  run_es(d2, sphere, 50);
  const bool deterministic = d1.mean == d2.mean && d1.sigma == d2.sigma && d1.cov == d2.cov &&
                             es_best(d1).vector == es_best(d2).vector;

  const double secs = seconds_since(start);
  const bool pass = sphere_best > -1e-6 && rosen_best > -1e-4 && ranking && deterministic && secs < 60.0;
  return {pass, "sphere best " + fmt("%.3e", sphere_best) + ", rosenbrock best " + fmt("%.3e", rosen_best) +
                    ", ranking invariance " + (ranking ? "bitwise" : "BROKEN") + ", determinism " +
                    (deterministic ? "bitwise" : "BROKEN") + ", " + fmt("%.1f", secs) + " s"};
}

// ---------------------------------------------------------------- 3

Outcome divergence_sanity() {
  const auto start = Clock::now();
  const auto [train_set, test_set] = synth_dataset(SynthConfig{});
  const auto same = domain_divergence(train_set, train_set, 0.2, 1);

  auto clean = train_set;
  for (std::size_t i = 0; i < clean.size(); ++i) clean.images.row(i)[0] = 0.0;
  auto corrupted = clean;
  for (std::size_t i = 0; i < corrupted.size(); ++i) corrupted.images.row(i)[0] = 1.0;
  const auto sep = domain_divergence(clean, corrupted, 0.2, 1);

  const double secs = seconds_since(start);
  const bool pass = same.d_a >= -0.4 && same.d_a <= 0.4 && sep.d_a >= 1.92 && sep.epsilon <= 0.02 && secs < 60.0;
  return {pass, "identical d_A " + fmt("%.3f", same.d_a) + ", one-pixel separable d_A " + fmt("%.3f", sep.d_a) +
                    " (epsilon " + fmt("%.3f", sep.epsilon) + "), " + fmt("%.1f", secs) + " s"};
}

// ---------------------------------------------------------------- 4

Outcome zero_identities() {
  const auto [train_set, test_set] = synth_dataset(SynthConfig{});
  const auto zero = zero_perturbation(2, 1, train_set.image_shape());
  const bool identity = apply(train_set, zero) == train_set;

  auto net = init_network(parse_arch(default_surrogate_arch(2)), train_set.image_shape(), 3);
  TrainOptions opt;
  opt.epochs = 2;
  train(net, train_set, opt);
  const double f_m = semantic_mismatch(net, train_set, zero);

  const SearchConfig cfg;
  const auto report = evaluate_candidate(train_set, encode(zero), cfg, candidate_seed(cfg, 0, 0));
  const bool pass = identity && f_m == 0.0 && report.f_m == 0.0 && report.f_total >= -0.2 && report.f_total <= 0.2;
  return {pass, std::string("apply identity ") + (identity ? "exact" : "BROKEN") + ", f_m " + fmt("%g", f_m) +
                    ", candidate f_m " + fmt("%g", report.f_m) + ", f_total " + fmt("%.3f", report.f_total)};
}

// ---------------------------------------------------------------- 5, 6, 8

constexpr int kSeeds = 5;
constexpr int kFreshEpochs = 30;
constexpr int kFreshRepeats = 3;

struct SeedRun {
  std::uint64_t seed = 0;
  double gen0_best = 0.0;
  double final_elitist = 0.0;
  double control = 0.0;
  double adam = 0.0;
  double sgd = 0.0;
  double adabound = 0.0;
  double uniform = 0.0;
  double column = 0.0;
  PixelPerturbation best;
  double search_secs = 0.0;
  double compare_secs = 0.0;
};

double mean_accuracy(const LabeledDataset& tr, const LabeledDataset& te, const PixelPerturbation& p,
                     OptimizerKind kind, std::uint64_t seed) {
  ComparisonOptions opt;
  opt.epochs = kFreshEpochs;
  opt.repeats = kFreshRepeats;
  opt.seed = seed;
  return optimizer_comparison(tr, te, p, {OptimizerConfig::defaults(kind)}, opt).aggregates[0].mean_clean_test_acc;
}

SeedRun run_seed(std::uint64_t seed) {
  SeedRun r;
  r.seed = seed;
  SynthConfig sc;
  sc.seed = seed;
  const auto [tr, te] = synth_dataset(sc);
  const auto shape = tr.image_shape();

  SearchConfig cfg;  // Np 1, population 8, 15 generations, reduced surrogate
  cfg.master_seed = seed;
  auto start = Clock::now();
  const auto result = mdd_es_search(tr, nullptr, cfg);
  r.search_secs = seconds_since(start);
  r.gen0_best = result.logs.front().best_f_total;
  r.final_elitist = result.logs.back().elitist_f_total;
  r.best = result.best;

  start = Clock::now();
  r.control = mean_accuracy(tr, te, zero_perturbation(2, 1, shape), OptimizerKind::Adam, seed);
  r.adam = mean_accuracy(tr, te, r.best, OptimizerKind::Adam, seed);
  r.sgd = mean_accuracy(tr, te, r.best, OptimizerKind::Sgd, seed);
  r.adabound = mean_accuracy(tr, te, r.best, OptimizerKind::AdaBound, seed);
  r.compare_secs = seconds_since(start);
  r.uniform = mean_accuracy(tr, te, baseline_uniform(2, 1, shape, derive_seed(seed, {stream::kInit})),
                            OptimizerKind::Adam, seed);
  r.column = mean_accuracy(tr, te, baseline_column(2, 1, shape), OptimizerKind::Adam, seed);

  std::cout << "  seed " << seed << ": f_total " << fmt("%.4f", r.gen0_best) << " -> " << fmt("%.4f", r.final_elitist)
            << " | clean-test acc: control " << fmt("%.3f", r.control) << ", evolved adam " << fmt("%.3f", r.adam)
            << " sgd " << fmt("%.3f", r.sgd) << " adabound " << fmt("%.3f", r.adabound) << ", uniform "
            << fmt("%.3f", r.uniform) << ", column " << fmt("%.3f", r.column) << " | edits";
  for (const auto& cls : r.best.classes)
    for (const auto& e : cls) std::cout << " (" << e.row << "," << e.col << " " << fmt("%+.2f", e.delta[0]) << ")";
  std::cout << " | search " << fmt("%.0f", r.search_secs) << " s" << std::endl;
  return r;
}

Outcome desk_evolution(const std::vector<SeedRun>& runs) {
  int ok = 0;
  double secs = 0.0;
  for (const auto& r : runs) {
    secs += r.search_secs;
    if (r.final_elitist > r.gen0_best && r.control - r.adam >= 0.15) ++ok;
  }
  return {ok >= 4 && secs < 1800.0, std::to_string(ok) + "/5 seeds improve f_total and drop ADAM clean-test accuracy "
                                        "by >= 15 points, search time " + fmt("%.0f", secs) + " s"};
}

Outcome optimizer_direction(const std::vector<SeedRun>& runs) {
  int sgd_better = 0, adabound_between = 0;
  double secs = 0.0;
  for (const auto& r : runs) {
    secs += r.compare_secs;
    if (r.sgd > r.adam) ++sgd_better;
    if (r.adabound >= std::min(r.sgd, r.adam) && r.adabound <= std::max(r.sgd, r.adam)) ++adabound_between;
  }
  return {sgd_better >= 4 && secs < 900.0,
          std::to_string(sgd_better) + "/5 seeds SGD > ADAM; AdaBound between them in " +
              std::to_string(adabound_between) + "/5 (reported), " + fmt("%.0f", secs) + " s"};
}

Outcome baseline_parity(const std::vector<SeedRun>& runs) {
  int ok = 0;
  for (const auto& r : runs)
    if (r.adam < r.uniform && r.uniform <= r.column) ++ok;
  return {ok >= 3, std::to_string(ok) + "/5 seeds evolved < uniform <= column (ADAM, no augmentation)"};
}

// ---------------------------------------------------------------- 7

Outcome loss_surface_contract(const PixelPerturbation& pert, const fs::path& dir) {
  const auto [tr, te] = synth_dataset(SynthConfig{});
  const auto corrupted = apply(tr, pert);
  const auto spec = parse_arch(default_surrogate_arch(2));
  auto sgd = init_network(spec, tr.image_shape(), 5);
  auto adam = sgd;
  TrainOptions opt;
  opt.epochs = 10;
  opt.optimizer = OptimizerConfig::defaults(OptimizerKind::Sgd);
  train(sgd, corrupted, opt);
  opt.optimizer = OptimizerConfig::defaults(OptimizerKind::Adam);
  train(adam, corrupted, opt);
  save_checkpoint(sgd, dir / "sgd.json", CheckpointFormat::Text);
  save_checkpoint(adam, dir / "adam.cbor", CheckpointFormat::Binary);
  const auto a = load_checkpoint(dir / "sgd.json");
  const auto b = load_checkpoint(dir / "adam.cbor");

  const auto points = loss_surface(a, b, corrupted, te, 21);
  bool grid = points.size() == 21 && points.front().alpha == 0.0 && points.back().alpha == 1.0;
  for (std::size_t k = 1; k < points.size(); ++k) grid = grid && points[k].alpha > points[k - 1].alpha;
  const auto ea_tr = evaluate(a, corrupted), ea_te = evaluate(a, te);
  const auto eb_tr = evaluate(b, corrupted), eb_te = evaluate(b, te);
  const double err = std::max({std::abs(points.front().train_loss - ea_tr.mean_loss),
                               std::abs(points.front().test_loss - ea_te.mean_loss),
                               std::abs(points.back().train_loss - eb_tr.mean_loss),
                               std::abs(points.back().test_loss - eb_te.mean_loss),
                               std::abs(points.front().test_acc - ea_te.accuracy),
                               std::abs(points.back().test_acc - eb_te.accuracy)});
  // Qualitative shape: how far the clean-test loss climbs within one grid step of each end.
  const double sgd_rise = points[1].test_loss - points[0].test_loss;
  const double adam_rise = points[19].test_loss - points[20].test_loss;
  return {grid && err <= 1e-9, "21 alphas " + std::string(grid ? "strictly increasing 0..1" : "MALFORMED") +
                                   ", endpoint error " + fmt("%.1e", err) + "; test-loss rise one step in: SGD end " +
                                   fmt("%+.4f", sgd_rise) + ", ADAM end " + fmt("%+.4f", adam_rise) + " (reported)"};
}

// ---------------------------------------------------------------- 9

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Files are compared byte for byte; JSON-lines logs ignore their timing field.
bool same_outputs(const fs::path& a, const fs::path& b, std::string& why) {
  std::vector<std::string> names;
  for (const auto& e : fs::directory_iterator(a))
    if (e.path().filename() != "manifest.json") names.push_back(e.path().filename().string());
  if (names.empty()) {
    why = a.string() + " is empty";
    return false;
  }
  for (const auto& name : names) {
    if (!fs::exists(b / name)) {
      why = name + " missing on rerun";
      return false;
    }
    if (name.ends_with(".jsonl")) {
      std::istringstream la(slurp(a / name)), lb(slurp(b / name));
      std::string x, y;
      while (true) {
        const bool ga = static_cast<bool>(std::getline(la, x));
        const bool gb = static_cast<bool>(std::getline(lb, y));
        if (ga != gb) {
          why = name + " differs in length";
          return false;
        }
        if (!ga) break;
        auto jx = json::parse(x), jy = json::parse(y);
        jx.erase("wall_ms");
        jy.erase("wall_ms");
        if (jx != jy) {
          why = name + " differs";
          return false;
        }
      }
    } else if (slurp(a / name) != slurp(b / name)) {
      why = name + " differs";
      return false;
    }
  }
  return true;
}

Outcome reproducibility(const fs::path& root) {
  const auto d = [&](const std::string& name) { return (root / name).string(); };
  const std::vector<std::string> small = {"--per-class", "100", "--test-per-class", "50"};
  auto with = [&](std::vector<std::string> args) {
    args.insert(args.end(), small.begin(), small.end());
    return args;
  };
  const std::vector<std::pair<std::string, std::vector<std::string>>> commands = {
      {"baseline-uniform", with({"baseline", "--mode", "uniform", "--seed", "3", "--out", d("baseline-uniform")})},
      {"baseline-column", with({"baseline", "--mode", "column", "--out", d("baseline-column")})},
      {"evolve", with({"evolve", "--gens", "2", "--pop", "4", "--epochs", "2", "--subset", "120", "--seed", "5",
                       "--threads", "2", "--log-test", "--out", d("evolve")})},
      {"apply", with({"apply", "--perturbation", d("evolve") + "/perturbation.json", "--out", d("apply")})},
      {"train-sgd", with({"train", "--optimizer", "sgd", "--epochs", "3", "--perturbation",
                          d("evolve") + "/perturbation.json", "--out", d("train-sgd")})},
      {"train-adam", with({"train", "--optimizer", "adam", "--epochs", "3", "--binary", "--augment",
                           "--perturbation", d("evolve") + "/perturbation.json", "--out", d("train-adam")})},
      {"surface", with({"surface", "--ckpt-a", d("train-sgd") + "/checkpoint.json", "--ckpt-b",
                        d("train-adam") + "/checkpoint.cbor", "--alphas", "11", "--out", d("surface")})},
      {"divergence", {"divergence", "--dataset", "synth", "--corrupted", d("apply"), "--epochs", "3",
                      "--num-classes", "2", "--per-class", "100", "--test-per-class", "50", "--out",
                      d("divergence")}},
      {"compare", with({"compare", "--optimizers", "sgd,adam,rmsprop,adabound", "--epochs", "2", "--repeats", "2",
                        "--threads", "2", "--perturbation", d("baseline-column") + "/perturbation.json", "--out",
                        d("compare")})},
  };
  int ok = 0;
  std::string failures;
  for (const auto& [name, args] : commands) {
    if (run_cli(args) != 0) {
      failures += " " + name + " (run failed)";
      continue;
    }
    const auto again = root / (name + "-rerun");
    if (run_cli({"rerun", d(name) + "/manifest.json", "--out", again.string()}) != 0) {
      failures += " " + name + " (rerun failed)";
      continue;
    }
    std::string why;
    if (same_outputs(root / name, again, why))
      ++ok;
    else
      failures += " " + name + " (" + why + ")";
  }
  const int total = static_cast<int>(commands.size());
  return {ok == total, std::to_string(ok) + "/" + std::to_string(total) +
                           " commands reproduce bit-identically from their manifests" +
                           (failures.empty() ? "" : ";" + failures)};
}

}  // namespace

int main() {
  const auto scratch = fs::temp_directory_path() / "evoshift_acceptance";
  fs::remove_all(scratch);
  fs::create_directories(scratch);

  std::vector<std::pair<std::string, Outcome>> results;
  auto report = [&](const std::string& name, const Outcome& o) {
    std::cout << (o.pass ? "PASS" : "FAIL") << "  " << name << ": " << o.summary << std::endl;
    results.emplace_back(name, o);
  };

  report("[1] gradient oracle", gradient_oracle());
  report("[2] CMA-ES oracles", cmaes_oracles());
  report("[3] divergence sanity", divergence_sanity());
  report("[4] zero-perturbation identities", zero_identities());

  std::cout << "  desk-scale runs: " << kFreshRepeats << " fresh trainings of " << kFreshEpochs
            << " epochs per accuracy" << std::endl;
  std::vector<SeedRun> runs;
  for (int s = 0; s < kSeeds; ++s) runs.push_back(run_seed(static_cast<std::uint64_t>(s)));
  report("[5] desk-scale evolution", desk_evolution(runs));
  report("[6] optimizer robustness direction", optimizer_direction(runs));
  report("[7] loss-surface contract", loss_surface_contract(runs.front().best, scratch));
  report("[8] baseline parity", baseline_parity(runs));
  report("[9] reproducibility", reproducibility(scratch / "cli"));

  const auto passed = std::count_if(results.begin(), results.end(), [](const auto& r) { return r.second.pass; });
  std::cout << passed << "/" << results.size() << " criteria passed" << std::endl;
  return passed == static_cast<long>(results.size()) ? 0 : 1;
}
