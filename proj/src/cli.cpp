#include "evoshift/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "evoshift/checkpoint.hpp"
#include "evoshift/error.hpp"
#include "evoshift/experiments.hpp"
#include "evoshift/fitness.hpp"
#include "evoshift/idx.hpp"
#include "evoshift/perturb.hpp"
#include "evoshift/synth.hpp"
#include "evoshift/train.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace evoshift {

namespace {

struct DatasetArgs {
  std::string dataset = "synth";
  std::uint64_t synth_seed = 0;
  int classes = 2;
  std::size_t per_class = 500;
  std::size_t test_per_class = 250;
  std::size_t size = 8;
  int num_classes = 0;  // for IDX: 0 infers max(label)+1

  void add_to(CLI::App& app) {
    app.add_option("--dataset", dataset, "'synth' or a directory with train/test IDX files")->capture_default_str();
    app.add_option("--synth-seed", synth_seed, "seed of the synthetic dataset")->capture_default_str();
    app.add_option("--classes", classes, "synthetic class count")->capture_default_str();
    app.add_option("--per-class", per_class, "synthetic training images per class")->capture_default_str();
    app.add_option("--test-per-class", test_per_class, "synthetic test images per class")->capture_default_str();
    app.add_option("--size", size, "synthetic image height and width")->capture_default_str();
    app.add_option("--num-classes", num_classes, "class count for IDX data (0 infers)")->capture_default_str();
  }
};

// Candidate file names inside a dataset directory, checked in order.
fs::path find_split_file(const fs::path& dir, const std::string& split, const std::string& kind) {
  const std::string idx_kind = kind == "images" ? "idx3" : "idx1";
  const std::vector<std::string> names = {split + "-" + kind + ".idx",
                                          split + "-" + kind + ".idx.gz",
                                          split + "-" + kind + "-" + idx_kind + "-ubyte",
                                          split + "-" + kind + "-" + idx_kind + "-ubyte.gz",
                                          split + "-" + kind + "." + idx_kind + "-ubyte",
                                          split + "-" + kind + "." + idx_kind + "-ubyte.gz"};
  std::vector<std::string> alt = names;
  if (split == "test")  // MNIST ships the test split as t10k-*.
    for (const auto& n : names) alt.push_back("t10k" + n.substr(4));
  for (const auto& n : alt)
    if (fs::exists(dir / n)) return dir / n;
  throw Error(ErrorCode::Io, "no " + split + " " + kind + " file in " + dir.string());
}

std::pair<LabeledDataset, LabeledDataset> load_datasets(const DatasetArgs& a) {
  if (a.dataset == "synth") {
    SynthConfig cfg;
    cfg.seed = a.synth_seed;
    cfg.classes = a.classes;
    cfg.train_per_class = a.per_class;
    cfg.test_per_class = a.test_per_class;
    cfg.shape = {1, a.size, a.size};
    return synth_dataset(cfg);
  }
  const fs::path dir(a.dataset);
  if (!fs::is_directory(dir)) throw Error(ErrorCode::Io, "dataset directory not found: " + a.dataset);
  auto train = load_idx(find_split_file(dir, "train", "images"), find_split_file(dir, "train", "labels"),
                        a.num_classes);
  auto test = load_idx(find_split_file(dir, "test", "images"), find_split_file(dir, "test", "labels"),
                       a.num_classes > 0 ? a.num_classes : train.num_classes);
  if (test.num_classes != train.num_classes) {
    // Keep both splits on the same class count.
    const int classes = std::max(test.num_classes, train.num_classes);
    train.num_classes = classes;
    test.num_classes = classes;
  }
  return {std::move(train), std::move(test)};
}

void ensure_out_dir(const std::string& out) {
  if (out.empty()) throw Error(ErrorCode::InvalidConfig, "--out is required");
  fs::create_directories(out);
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream f(path);
  if (!f) throw Error(ErrorCode::Io, "cannot write " + path.string());
  return f;
}

// Options whose values are file-system paths; they are made absolute in the
// manifest so a rerun does not depend on the working directory.
const std::vector<std::string> kPathOptions = {"--dataset", "--corrupted", "--perturbation",
                                               "--ckpt-a", "--ckpt-b", "--out"};

json manifest_argv(const std::vector<std::string>& args) {
  json out = json::array();
  for (std::size_t i = 0; i < args.size(); ++i) {
    std::string a = args[i];
    std::string key = a, value;
    bool inline_value = false;
    if (const auto eq = a.find('='); a.rfind("--", 0) == 0 && eq != std::string::npos) {
      key = a.substr(0, eq);
      value = a.substr(eq + 1);
      inline_value = true;
    }
    const bool is_path = std::find(kPathOptions.begin(), kPathOptions.end(), key) != kPathOptions.end();
    auto absolutize = [&](const std::string& v) {
      if (key == "--dataset" && v == "synth") return v;
      return fs::absolute(v).lexically_normal().string();
    };
    if (is_path && inline_value) {
      out.push_back(key + "=" + absolutize(value));
    } else if (is_path && i + 1 < args.size()) {
      out.push_back(a);
      out.push_back(absolutize(args[++i]));
    } else {
      out.push_back(a);
    }
  }
  return out;
}

void write_manifest(const fs::path& out_dir, const std::vector<std::string>& args, const json& config) {
  const json doc = {{"tool", "evoshift"},
                    {"tool_version", kToolVersion},
                    {"compiler", __VERSION__},
                    {"cxx_standard", static_cast<long>(__cplusplus)},
                    {"argv", manifest_argv(args)},
                    {"config", config}};
  auto f = open_out(out_dir / "manifest.json");
  f << doc.dump(1) << '\n';
}

json dataset_config(const DatasetArgs& a) {
  return {{"dataset", a.dataset}, {"synth_seed", a.synth_seed}, {"classes", a.classes},
          {"per_class", a.per_class}, {"test_per_class", a.test_per_class}, {"size", a.size},
          {"num_classes", a.num_classes}};
}

json optimizer_config(const OptimizerConfig& o) {
  return {{"kind", to_string(o.kind)}, {"learning_rate", o.learning_rate}, {"momentum", o.momentum},
          {"beta1", o.beta1}, {"beta2", o.beta2}, {"decay", o.decay}, {"epsilon", o.epsilon},
          {"final_lr", o.final_lr}};
}

OptimizerConfig make_optimizer(const std::string& name, std::optional<double> lr) {
  auto cfg = OptimizerConfig::defaults(parse_optimizer(name));
  if (lr) cfg.learning_rate = *lr;
  cfg.validate();
  return cfg;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

bool is_validation_error(ErrorCode code) {
  switch (code) {
    case ErrorCode::EigenFailure:
    case ErrorCode::NonFiniteFitness:
    case ErrorCode::PopulationSizeMismatch:
    case ErrorCode::NoHistory:
    case ErrorCode::LengthMismatch:
      return false;
    default:
      return true;
  }
}

int dispatch(const std::vector<std::string>& args);

int rerun(const fs::path& manifest_path, const std::string& out_override) {
  std::ifstream in(manifest_path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + manifest_path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::BadFormat, std::string("manifest: ") + e.what());
  }
  auto argv = doc.at("argv").get<std::vector<std::string>>();
  if (!out_override.empty()) {
    bool replaced = false;
    for (std::size_t i = 0; i < argv.size(); ++i) {
      if (argv[i] == "--out" && i + 1 < argv.size()) {
        argv[i + 1] = out_override;
        replaced = true;
      } else if (argv[i].rfind("--out=", 0) == 0) {
        argv[i] = "--out=" + out_override;
        replaced = true;
      }
    }
    if (!replaced) {
      argv.push_back("--out");
      argv.push_back(out_override);
    }
  }
  if (!argv.empty() && argv.front() == "rerun") throw Error(ErrorCode::InvalidConfig, "manifest records a rerun");
  return dispatch(argv);
}

int dispatch(const std::vector<std::string>& args) {
  CLI::App app{"Evolutionary search for class-wise few-pixel training perturbations"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  // evolve
  auto* evolve = app.add_subcommand("evolve", "search for a perturbation maximising f_m + f_d");
  DatasetArgs evolve_data;
  evolve_data.add_to(*evolve);
  SearchConfig search;
  std::string evolve_out, evolve_opt = "adam";
  evolve->add_option("--np", search.num_pixels, "perturbed pixels per class")->capture_default_str();
  evolve->add_option("--pop", search.population, "CMA-ES population size")->capture_default_str();
  evolve->add_option("--gens", search.generations, "generations")->capture_default_str();
  evolve->add_option("--sigma0", search.sigma0, "initial CMA-ES step size")->capture_default_str();
  evolve->add_option("--optimizer", evolve_opt, "surrogate optimizer")->capture_default_str();
  evolve->add_option("--epochs", search.inner_epochs, "surrogate epochs per candidate")->capture_default_str();
  evolve->add_option("--batch", search.batch_size, "mini-batch size")->capture_default_str();
  evolve->add_option("--subset", search.train_subset, "training images scored per candidate")->capture_default_str();
  evolve->add_option("--seed", search.master_seed, "master seed")->capture_default_str();
  evolve->add_option("--arch", search.arch, "surrogate architecture (default reduced GrayNet)");
  evolve->add_option("--split", search.discriminator_split, "discriminator held-out fraction")->capture_default_str();
  evolve->add_option("--disc-epochs", search.discriminator_epochs, "discriminator epochs")->capture_default_str();
  evolve->add_option("--threads", search.threads, "parallel candidate evaluations")->capture_default_str();
  evolve->add_flag("--log-test", search.log_test_accuracy, "log clean-test accuracy per generation (diagnostic)");
  evolve->add_option("--out", evolve_out, "output directory")->required();

  // apply
  auto* apply_cmd = app.add_subcommand("apply", "write the training set with a perturbation applied");
  DatasetArgs apply_data;
  apply_data.add_to(*apply_cmd);
  std::string apply_pert, apply_out;
  apply_cmd->add_option("--perturbation", apply_pert, "perturbation file")->required();
  apply_cmd->add_option("--out", apply_out, "output dataset directory")->required();

  // train
  auto* train_cmd = app.add_subcommand("train", "train a network, optionally on perturbed data");
  DatasetArgs train_data;
  train_data.add_to(*train_cmd);
  std::string train_opt = "adam", train_arch, train_pert, train_out;
  std::optional<double> train_lr;
  int train_epochs = 30;
  std::size_t train_batch = 64;
  std::uint64_t train_seed = 0;
  bool train_augment = false, train_binary = false;
  train_cmd->add_option("--optimizer", train_opt, "sgd|adam|rmsprop|adabound")->capture_default_str();
  train_cmd->add_option("--lr", train_lr, "learning rate override");
  train_cmd->add_option("--epochs", train_epochs, "epochs")->capture_default_str();
  train_cmd->add_option("--batch", train_batch, "mini-batch size")->capture_default_str();
  train_cmd->add_option("--seed", train_seed, "seed")->capture_default_str();
  train_cmd->add_option("--arch", train_arch, "architecture (default reduced GrayNet)");
  train_cmd->add_option("--perturbation", train_pert, "perturbation applied to the training split");
  train_cmd->add_flag("--augment", train_augment, "random +-2 px shifts");
  train_cmd->add_flag("--binary", train_binary, "write the checkpoint in binary form");
  train_cmd->add_option("--out", train_out, "output directory")->required();

  // surface
  auto* surface_cmd = app.add_subcommand("surface", "interpolate between two checkpoints");
  DatasetArgs surface_data;
  surface_data.add_to(*surface_cmd);
  std::string ckpt_a, ckpt_b, surface_pert, surface_out;
  int alphas = 21;
  surface_cmd->add_option("--ckpt-a", ckpt_a, "checkpoint at alpha=0 (SGD)")->required();
  surface_cmd->add_option("--ckpt-b", ckpt_b, "checkpoint at alpha=1 (ADAM)")->required();
  surface_cmd->add_option("--perturbation", surface_pert, "perturbation applied to the training split");
  surface_cmd->add_option("--alphas", alphas, "grid size including both endpoints")->capture_default_str();
  surface_cmd->add_option("--out", surface_out, "output directory")->required();

  // divergence
  auto* div_cmd = app.add_subcommand("divergence", "proxy A-distance between clean and corrupted training sets");
  DatasetArgs div_data;
  div_data.add_to(*div_cmd);
  std::string corrupted = "synth", div_out;
  double split = 0.2;
  std::uint64_t div_seed = 0;
  int div_epochs = 10;
  std::size_t div_subset = 0;
  div_cmd->add_option("--corrupted", corrupted, "corrupted dataset directory or 'synth'")->capture_default_str();
  div_cmd->add_option("--split", split, "held-out fraction")->capture_default_str();
  div_cmd->add_option("--seed", div_seed, "seed")->capture_default_str();
  div_cmd->add_option("--epochs", div_epochs, "discriminator epochs")->capture_default_str();
  div_cmd->add_option("--subset", div_subset, "use only the first N pairs (0 = all)")->capture_default_str();
  div_cmd->add_option("--out", div_out, "optional output directory for the record and manifest");

  // baseline
  auto* base_cmd = app.add_subcommand("baseline", "write a uniform or left-column baseline perturbation");
  DatasetArgs base_data;
  base_data.add_to(*base_cmd);
  std::string mode = "uniform", base_out;
  int base_np = 1;
  std::uint64_t base_seed = 0;
  base_cmd->add_option("--mode", mode, "uniform|column")->check(CLI::IsMember({"uniform", "column"}))->capture_default_str();
  base_cmd->add_option("--np", base_np, "perturbed pixels per class")->capture_default_str();
  base_cmd->add_option("--seed", base_seed, "seed (uniform mode)")->capture_default_str();
  base_cmd->add_option("--out", base_out, "output directory")->required();

  // compare
  auto* cmp_cmd = app.add_subcommand("compare", "optimizer robustness comparison under a perturbation");
  DatasetArgs cmp_data;
  cmp_data.add_to(*cmp_cmd);
  std::string cmp_pert, cmp_out, cmp_opts = "sgd,adam,rmsprop,adabound";
  ComparisonOptions cmp;
  cmp_cmd->add_option("--perturbation", cmp_pert, "perturbation file (omit for clean training)");
  cmp_cmd->add_option("--optimizers", cmp_opts, "comma-separated optimizer list")->capture_default_str();
  cmp_cmd->add_option("--epochs", cmp.epochs, "epochs")->capture_default_str();
  cmp_cmd->add_option("--batch", cmp.batch_size, "mini-batch size")->capture_default_str();
  cmp_cmd->add_option("--repeats", cmp.repeats, "repeats per optimizer")->capture_default_str();
  cmp_cmd->add_option("--seed", cmp.seed, "seed")->capture_default_str();
  cmp_cmd->add_option("--arch", cmp.arch, "architecture (default reduced GrayNet)");
  cmp_cmd->add_option("--threads", cmp.threads, "parallel training runs")->capture_default_str();
  cmp_cmd->add_flag("--augment", cmp.augment, "random +-2 px shifts");
  cmp_cmd->add_option("--out", cmp_out, "output directory")->required();

  // rerun
  auto* rerun_cmd = app.add_subcommand("rerun", "re-execute a command from its manifest");
  std::string manifest_path, rerun_out;
  rerun_cmd->add_option("manifest", manifest_path, "manifest.json written by a previous run")->required();
  rerun_cmd->add_option("--out", rerun_out, "output directory override");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  if (evolve->parsed()) {
    search.inner_optimizer = make_optimizer(evolve_opt, std::nullopt);
    search.validate();
    auto [train, test] = load_datasets(evolve_data);
    parse_arch(search.surrogate_arch(train.num_classes));
    ensure_out_dir(evolve_out);
    const fs::path out(evolve_out);
    json config = {{"dataset", dataset_config(evolve_data)},
                   {"num_pixels", search.num_pixels},
                   {"population", search.population},
                   {"generations", search.generations},
                   {"sigma0", search.sigma0},
                   {"arch", search.surrogate_arch(train.num_classes)},
                   {"inner_optimizer", optimizer_config(search.inner_optimizer)},
                   {"inner_epochs", search.inner_epochs},
                   {"batch_size", search.batch_size},
                   {"train_subset", search.train_subset},
                   {"discriminator_split", search.discriminator_split},
                   {"discriminator_epochs", search.discriminator_epochs},
                   {"master_seed", search.master_seed},
                   {"threads", search.threads},
                   {"log_test_accuracy", search.log_test_accuracy}};
    write_manifest(out, args, config);
    auto log_file = open_out(out / "generations.jsonl");
    const auto result = mdd_es_search(train, search.log_test_accuracy ? &test : nullptr, search,
                                      [&](const GenerationLog& log) {
                                        write_generation_log(log_file, log);
                                        log_file.flush();
                                        std::cerr << "generation " << log.generation << " best "
                                                  << log.best_f_total << " elitist " << log.elitist_f_total << '\n';
                                      });
    save_perturbation(result.best, out / "perturbation.json");
    const auto& r = result.best_report;
    auto best = open_out(out / "best.json");
    best << json{{"f_total", r.f_total}, {"f_m", r.f_m}, {"f_d", r.f_d}, {"epsilon", r.epsilon}, {"d_A", r.d_a},
                 {"clean_train_loss", r.clean_train_loss}, {"corrupted_train_loss", r.corrupted_train_loss},
                 {"surrogate_train_acc", r.surrogate_train_acc}, {"genome", result.best_genome.vector}}
                .dump(1)
         << '\n';
    return 0;
  }

  if (apply_cmd->parsed()) {
    auto [train, test] = load_datasets(apply_data);
    const auto pert = load_perturbation(apply_pert);
    ensure_out_dir(apply_out);
    const fs::path out(apply_out);
    write_manifest(out, args, {{"dataset", dataset_config(apply_data)}, {"perturbation", apply_pert}});
    write_idx(apply(train, pert), out / "train-images.idx", out / "train-labels.idx");
    write_idx(test, out / "test-images.idx", out / "test-labels.idx");
    return 0;
  }

  if (train_cmd->parsed()) {
    const auto opt = make_optimizer(train_opt, train_lr);
    auto [train_set, test] = load_datasets(train_data);
    const auto spec = parse_arch(train_arch.empty() ? default_surrogate_arch(train_set.num_classes) : train_arch);
    if (!train_pert.empty()) train_set = apply(train_set, load_perturbation(train_pert));
    ensure_out_dir(train_out);
    const fs::path out(train_out);
    write_manifest(out, args,
                   {{"dataset", dataset_config(train_data)}, {"optimizer", optimizer_config(opt)},
                    {"arch", to_string(spec)}, {"epochs", train_epochs}, {"batch_size", train_batch},
                    {"seed", train_seed}, {"augment", train_augment}, {"perturbation", train_pert}});
    auto net = init_network(spec, train_set.image_shape(), train_seed);
    TrainOptions t;
    t.optimizer = opt;
    t.epochs = train_epochs;
    t.batch_size = train_batch;
    t.seed = train_seed;
    t.augment = train_augment;
    t.eval = &test;
    const auto history = train(net, train_set, t);
    save_checkpoint(net, out / (train_binary ? "checkpoint.cbor" : "checkpoint.json"),
                    train_binary ? CheckpointFormat::Binary : CheckpointFormat::Text);
    auto hist = open_out(out / "history.jsonl");
    write_history(hist, history);
    const auto tr = evaluate(net, train_set);
    const auto te = evaluate(net, test);
    auto metrics = open_out(out / "metrics.json");
    metrics << json{{"train_acc", tr.accuracy}, {"train_loss", tr.mean_loss}, {"test_acc", te.accuracy},
                    {"test_loss", te.mean_loss}, {"diverged", history.diverged}}
                   .dump(1)
            << '\n';
    return history.diverged ? 2 : 0;
  }

  if (surface_cmd->parsed()) {
    const auto a = load_checkpoint(ckpt_a);
    const auto b = load_checkpoint(ckpt_b);
    auto [train, test] = load_datasets(surface_data);
    if (!surface_pert.empty()) train = apply(train, load_perturbation(surface_pert));
    if (alphas < 2) throw Error(ErrorCode::InvalidConfig, "--alphas must be at least 2");
    ensure_out_dir(surface_out);
    const fs::path out(surface_out);
    write_manifest(out, args,
                   {{"dataset", dataset_config(surface_data)}, {"ckpt_a", ckpt_a}, {"ckpt_b", ckpt_b},
                    {"perturbation", surface_pert}, {"alphas", alphas}});
    const auto points = loss_surface(a, b, train, test, alphas);
    auto table = open_out(out / "surface.csv");
    write_surface_table(table, points);
    return 0;
  }

  if (div_cmd->parsed()) {
    auto [clean, clean_test] = load_datasets(div_data);
    DatasetArgs corrupted_args = div_data;
    corrupted_args.dataset = corrupted;
    auto [dirty, dirty_test] = load_datasets(corrupted_args);
    if (div_subset > 0 && div_subset < clean.size()) {
      std::vector<std::size_t> first(div_subset);
      std::iota(first.begin(), first.end(), 0);
      clean = select(clean, first);
      dirty = select(dirty, first);
    }
    DiscriminatorOptions disc;
    disc.epochs = div_epochs;
    if (div_epochs < 1) throw Error(ErrorCode::InvalidConfig, "--epochs must be positive");
    json config = {{"dataset", dataset_config(div_data)}, {"corrupted", corrupted}, {"split", split},
                   {"seed", div_seed}, {"epochs", div_epochs}, {"subset", div_subset}};
    if (!div_out.empty()) {
      ensure_out_dir(div_out);
      write_manifest(div_out, args, config);
    }
    const auto r = domain_divergence(clean, dirty, split, div_seed, disc);
    const json record = {{"epsilon", r.epsilon}, {"f_d", r.f_d}, {"d_A", r.d_a}};
    std::cout << record.dump() << std::endl;
    if (!div_out.empty()) {
      auto f = open_out(fs::path(div_out) / "divergence.json");
      f << record.dump() << '\n';
    }
    return 0;
  }

  if (base_cmd->parsed()) {
    auto [train, test] = load_datasets(base_data);
    const auto shape = train.image_shape();
    const auto pert = mode == "column" ? baseline_column(train.num_classes, base_np, shape)
                                       : baseline_uniform(train.num_classes, base_np, shape, base_seed);
    ensure_out_dir(base_out);
    write_manifest(base_out, args,
                   {{"dataset", dataset_config(base_data)}, {"mode", mode}, {"num_pixels", base_np},
                    {"seed", base_seed}});
    save_perturbation(pert, fs::path(base_out) / "perturbation.json");
    return 0;
  }

  if (cmp_cmd->parsed()) {
    std::vector<OptimizerConfig> optimizers;
    for (const auto& name : split_list(cmp_opts)) optimizers.push_back(make_optimizer(name, std::nullopt));
    auto [train, test] = load_datasets(cmp_data);
    if (!cmp.arch.empty()) parse_arch(cmp.arch);
    const auto pert = cmp_pert.empty() ? zero_perturbation(train.num_classes, 1, train.image_shape())
                                       : load_perturbation(cmp_pert);
    ensure_out_dir(cmp_out);
    const fs::path out(cmp_out);
    json opt_cfg = json::array();
    for (const auto& o : optimizers) opt_cfg.push_back(optimizer_config(o));
    write_manifest(out, args,
                   {{"dataset", dataset_config(cmp_data)}, {"perturbation", cmp_pert}, {"optimizers", opt_cfg},
                    {"epochs", cmp.epochs}, {"batch_size", cmp.batch_size}, {"repeats", cmp.repeats},
                    {"seed", cmp.seed}, {"arch", cmp.arch}, {"augment", cmp.augment}});
    const auto report = optimizer_comparison(train, test, pert, optimizers, cmp);
    auto table = open_out(out / "comparison.csv");
    write_comparison_table(table, report);
    json agg = json::array();
    for (const auto& a : report.aggregates)
      agg.push_back({{"optimizer", to_string(a.optimizer)}, {"mean_clean_test_acc", a.mean_clean_test_acc},
                     {"std_clean_test_acc", a.std_clean_test_acc},
                     {"mean_corrupted_train_acc", a.mean_corrupted_train_acc},
                     {"std_corrupted_train_acc", a.std_corrupted_train_acc}});
    auto summary = open_out(out / "summary.json");
    summary << agg.dump(1) << '\n';
    return 0;
  }

  if (rerun_cmd->parsed()) return rerun(manifest_path, rerun_out);
  return 1;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  try {
    return dispatch(args);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return is_validation_error(e.code()) ? 1 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}

int run_cli(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_cli(args);
}

}  // namespace evoshift
