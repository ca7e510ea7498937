// Command-line front end: synthetic data generation, initialization
// verification, single training runs and full experiment grids.

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>

#include "pba/bench.hpp"
#include "pba/pca.hpp"
#include "pba/pcainit.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitNumerical = 2;

void check_keys(const json& j, std::initializer_list<const char*> allowed,
                const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : allowed) {
      if (it.key() == k) { ok = true; break; }
    }
    if (!ok) throw std::invalid_argument("config: unknown key '" + it.key() + "' in " + where);
  }
}

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file " + path);
  return json::parse(in);
}

int cmd_synth(long long count, double exponent, std::uint64_t seed,
              const std::string& out) {
  pba::Rng rng(seed);
  pba::Dataset d = pba::gen_power_surface(count, exponent, rng);
  pba::save_csv(d, out);
  std::printf("wrote %lld rows to %s\n", static_cast<long long>(d.x.rows()),
              out.c_str());
  return kExitOk;
}

int cmd_init_check(const std::string& data_path, const std::string& arch_spec,
                   const std::string& method, std::uint64_t seed, double tol,
                   bool scale) {
  if (!fs::exists(data_path))
    throw std::invalid_argument("cannot open data file " + data_path);
  pba::Dataset raw = pba::load_csv(data_path);
  pba::TransformParams tp;
  pba::Dataset d = pba::fit_transform(raw, scale, tp);
  pba::Architecture arch = pba::Architecture::parse(arch_spec);
  pba::PcaModel model = pba::pca_fit(d.x, arch.bottleneck_dim());
  pba::Rng rng(seed);
  pba::AeParams params = [&] {
    if (method == "robust") return pba::pca_robust_init(model, arch, rng);
    if (method == "naive") return pba::pca_naive_init(model, arch, rng);
    if (method == "random") return pba::random_init(arch, rng);
    throw std::invalid_argument("method must be robust, naive or random");
  }();
  pba::InitReport report = pba::verify_init(params, d.x, model, tol);
  std::cout << pba::init_report_to_json(report).dump(2) << "\n";
  return report.pass ? kExitOk : kExitNumerical;
}

struct TrainFileConfig {
  json dataset;
  std::string arch_spec = "3-20-3-2-3-20-3";
  std::string method = "pca-robust";
  bool scale = false;
  std::uint64_t seed = 0;
  pba::SplitSpec split_spec;
  pba::TrainConfig train;
};

json default_train_json() {
  json j;
  j["dataset"] = {{"type", "synthetic"}, {"count", 1000}, {"exponent", 4.0}};
  j["architecture"] = "3-20-3-2-3-20-3";
  j["method"] = "pca-robust";
  j["scale"] = false;
  j["seed"] = 0;
  j["split"] = {{"test_count", 250}, {"test_frac", 0.0}, {"pool_size", 40}};
  json train;
  pba::TrainConfig tc;
  train["learning_rate"] = tc.learning_rate;
  train["beta1"] = tc.adam_beta1;
  train["beta2"] = tc.adam_beta2;
  train["epsilon"] = tc.adam_epsilon;
  train["max_epochs"] = tc.max_epochs;
  train["patience"] = tc.patience;
  train["freeze_alphas"] = tc.freeze_alphas;
  j["train"] = train;
  return j;
}

TrainFileConfig parse_train_config(const json& j) {
  check_keys(j, {"dataset", "architecture", "method", "scale", "seed", "split", "train"},
             "train config");
  TrainFileConfig cfg;
  cfg.dataset = j.at("dataset");
  check_keys(cfg.dataset, {"type", "count", "exponent", "path"}, "dataset");
  cfg.arch_spec = j.value("architecture", cfg.arch_spec);
  cfg.method = j.value("method", cfg.method);
  cfg.scale = j.value("scale", cfg.scale);
  cfg.seed = j.value("seed", cfg.seed);
  if (j.contains("split")) {
    const json& s = j.at("split");
    check_keys(s, {"test_count", "test_frac", "pool_size", "train_frac", "val_frac",
                   "select_frac"},
               "split");
    cfg.split_spec.test_count = s.value("test_count", cfg.split_spec.test_count);
    cfg.split_spec.test_frac = s.value("test_frac", cfg.split_spec.test_frac);
    cfg.split_spec.pool_size = s.value("pool_size", cfg.split_spec.pool_size);
    cfg.split_spec.train_frac = s.value("train_frac", cfg.split_spec.train_frac);
    cfg.split_spec.val_frac = s.value("val_frac", cfg.split_spec.val_frac);
    cfg.split_spec.select_frac = s.value("select_frac", cfg.split_spec.select_frac);
  }
  if (j.contains("train")) {
    const json& t = j.at("train");
    check_keys(t, {"learning_rate", "beta1", "beta2", "epsilon", "max_epochs",
                   "patience", "freeze_alphas"},
               "train");
    cfg.train.learning_rate = t.value("learning_rate", cfg.train.learning_rate);
    cfg.train.adam_beta1 = t.value("beta1", cfg.train.adam_beta1);
    cfg.train.adam_beta2 = t.value("beta2", cfg.train.adam_beta2);
    cfg.train.adam_epsilon = t.value("epsilon", cfg.train.adam_epsilon);
    cfg.train.max_epochs = t.value("max_epochs", cfg.train.max_epochs);
    cfg.train.patience = t.value("patience", cfg.train.patience);
    cfg.train.freeze_alphas = t.value("freeze_alphas", cfg.train.freeze_alphas);
  }
  return cfg;
}

pba::Dataset load_dataset(const json& dataset, std::uint64_t seed) {
  const std::string type = dataset.at("type").get<std::string>();
  if (type == "synthetic") {
    pba::Rng rng(pba::derive_seed(seed, 7, 0, 0, 0));
    return pba::gen_power_surface(dataset.value("count", 1000),
                                  dataset.value("exponent", 4.0), rng);
  }
  if (type == "csv") return pba::load_csv(dataset.at("path").get<std::string>());
  throw std::invalid_argument("dataset type must be synthetic or csv");
}

int cmd_train(const std::string& config_path, const std::string& out_dir) {
  TrainFileConfig cfg = parse_train_config(load_json(config_path));
  fs::create_directories(out_dir);

  pba::Dataset pool = load_dataset(cfg.dataset, cfg.seed);
  cfg.split_spec.seed = pba::derive_seed(cfg.seed, 0, cfg.split_spec.pool_size, 0, -1);
  pba::Splits splits = pba::split(pool, cfg.split_spec);
  pba::TransformParams tp = pba::fit_transform_params(splits.train, cfg.scale);
  const pba::Matrix x_train = pba::apply_transform(tp, splits.train);
  const pba::Matrix x_val = pba::apply_transform(tp, splits.val);

  pba::Architecture arch = pba::Architecture::parse(cfg.arch_spec);
  pba::Rng rng(pba::derive_seed(cfg.seed, 2, cfg.split_spec.pool_size, 0, 0));
  pba::AeParams init = [&] {
    if (cfg.method == "pca-robust") return pba::pca_robust_init(x_train, arch, rng);
    if (cfg.method == "pca-naive") return pba::pca_naive_init(x_train, arch, rng);
    if (cfg.method == "random") return pba::random_init(arch, rng);
    throw std::invalid_argument("method must be pca-robust, pca-naive or random");
  }();
  cfg.train.seed = cfg.seed;
  pba::TrainResult res = pba::train(init, x_train, x_val, cfg.train);

  json model = pba::ae_to_json(res.best);
  model["seed"] = cfg.seed;
  model["method"] = cfg.method;
  model["history"] = {{"epochs_trained", res.epochs_trained},
                      {"best_epoch", res.best_epoch},
                      {"final_val_loss", res.val_history.back()},
                      {"best_val_loss",
                       *std::min_element(res.val_history.begin(), res.val_history.end())}};
  std::ofstream(out_dir + "/model.json") << model.dump(2) << "\n";

  std::ofstream hist(out_dir + "/history.csv");
  hist << "epoch,train_loss,val_loss\n";
  char tbuf[40], vbuf[40];
  for (std::size_t e = 0; e < res.train_history.size(); ++e) {
    std::snprintf(tbuf, sizeof(tbuf), "%.17g", res.train_history[e]);
    std::snprintf(vbuf, sizeof(vbuf), "%.17g", res.val_history[e]);
    hist << e << ',' << tbuf << ',' << vbuf << '\n';
  }
  std::ofstream(out_dir + "/split.json") << pba::split_manifest(splits).dump() << "\n";

  if (res.diverged) {
    std::fprintf(stderr, "training diverged at epoch %d\n", res.diverged_epoch);
    return kExitNumerical;
  }
  std::printf("trained %d epochs (best at %d), artifacts in %s\n",
              res.epochs_trained, res.best_epoch, out_dir.c_str());
  return kExitOk;
}

int cmd_experiment(const std::string& config_path, const std::string& out_dir,
                   int jobs) {
  pba::ExperimentConfig config = pba::experiment_from_json(load_json(config_path));
  if (jobs > 0) config.jobs = jobs;
  fs::create_directories(out_dir);
  pba::ExperimentResult res = pba::run_experiment(config);
  pba::write_results_csv(res.trials, out_dir + "/results.csv");
  pba::write_aggregates_csv(res.stats, out_dir + "/aggregates.csv");

  std::printf("%-12s %-12s %-14s %-12s %-4s %s\n", "method", "sample_size", "mean",
              "sem", "n", "failures");
  for (const auto& [key, cell] : res.stats.cells) {
    std::printf("%-12s %-12lld %-14.6g %-12.3g %-4d %d\n", key.first.c_str(),
                static_cast<long long>(key.second), cell.mean, cell.sem, cell.n,
                cell.failures);
  }
  std::size_t failed = 0;
  for (const auto& t : res.trials) failed += t.failed ? 1 : 0;
  if (failed == res.trials.size()) {
    std::fprintf(stderr, "every trial failed\n");
    return kExitNumerical;
  }
  if (failed > 0) std::fprintf(stderr, "%zu trials failed\n", failed);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"PCA-boosted autoencoder toolkit"};
  app.require_subcommand(0, 1);

  bool print_default_experiment = false;
  bool print_default_train = false;
  app.add_flag("--print-default-config", print_default_experiment,
               "print the default experiment config JSON and exit");
  app.add_flag("--print-default-train-config", print_default_train,
               "print the default train config JSON and exit");

  auto* synth = app.add_subcommand("synth", "generate a power-surface CSV");
  long long count = 1000;
  double exponent = 4.0;
  std::uint64_t synth_seed = 0;
  std::string synth_out = "surface.csv";
  synth->add_option("--count", count, "number of points");
  synth->add_option("--exponent", exponent, "surface curvature exponent");
  synth->add_option("--seed", synth_seed, "rng seed");
  synth->add_option("--out", synth_out, "output CSV path")->required();

  auto* init_check = app.add_subcommand("init-check", "verify a PCA initialization");
  std::string ic_data, ic_arch = "3-20-3-2-3-20-3", ic_method = "robust";
  std::uint64_t ic_seed = 0;
  double ic_tol = 1e-6;
  bool ic_scale = false;
  init_check->add_option("--data", ic_data, "input CSV")->required();
  init_check->add_option("--arch", ic_arch, "layer widths, e.g. 3-20-3-2-3-20-3");
  init_check->add_option("--method", ic_method, "robust | naive | random");
  init_check->add_option("--seed", ic_seed, "rng seed");
  init_check->add_option("--tol", ic_tol, "pass threshold on the equivalence residual");
  init_check->add_flag("--scale", ic_scale, "standardize features");

  auto* train_cmd = app.add_subcommand("train", "train a single autoencoder");
  std::string train_config, train_out = "train_out";
  train_cmd->add_option("--config", train_config, "train config JSON")->required();
  train_cmd->add_option("--out", train_out, "output directory");

  auto* exp_cmd = app.add_subcommand("experiment", "run a full experiment grid");
  std::string exp_config, exp_out = "experiment_out";
  int jobs = 0;
  exp_cmd->add_option("--config", exp_config, "experiment config JSON")->required();
  exp_cmd->add_option("--out", exp_out, "output directory");
  exp_cmd->add_option("--jobs", jobs, "worker threads (default: all cores)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (print_default_experiment) {
      std::cout << pba::default_experiment_json().dump(2) << "\n";
      return kExitOk;
    }
    if (print_default_train) {
      std::cout << default_train_json().dump(2) << "\n";
      return kExitOk;
    }
    if (synth->parsed()) return cmd_synth(count, exponent, synth_seed, synth_out);
    if (init_check->parsed())
      return cmd_init_check(ic_data, ic_arch, ic_method, ic_seed, ic_tol, ic_scale);
    if (train_cmd->parsed()) return cmd_train(train_config, train_out);
    if (exp_cmd->parsed()) return cmd_experiment(exp_config, exp_out, jobs);
    std::cout << app.help();
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitNumerical;
  }
}
