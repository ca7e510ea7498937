#include "pba/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <mutex>
#include <numeric>
#include <thread>

#include "pba/pca.hpp"
#include "pba/pcainit.hpp"

namespace pba {

std::string method_name(Method m) {
  switch (m) {
    case Method::Pca: return "pca";
    case Method::PcaRobust: return "pca-robust";
    case Method::PcaNaive: return "pca-naive";
    case Method::Random: return "random";
  }
  throw std::logic_error("method_name: bad enum");
}

Method method_from_name(const std::string& name) {
  if (name == "pca") return Method::Pca;
  if (name == "pca-robust") return Method::PcaRobust;
  if (name == "pca-naive") return Method::PcaNaive;
  if (name == "random") return Method::Random;
  throw std::invalid_argument("unknown method '" + name + "'");
}

void ExperimentConfig::validate() const {
  if (synthetic.has_value() == !csv_path.empty()) {
    throw std::invalid_argument("config: exactly one of synthetic/csv data source");
  }
  if (methods.empty()) throw std::invalid_argument("config: no methods");
  if (sample_sizes.empty()) throw std::invalid_argument("config: no sample sizes");
  for (Index s : sample_sizes) {
    if (s < 10) throw std::invalid_argument("config: sample sizes must be >= 10");
  }
  if (repetitions < 1) throw std::invalid_argument("config: repetitions < 1");
  if (restarts < 1) throw std::invalid_argument("config: restarts < 1");
  if (test_count <= 0 && test_frac <= 0.0) {
    throw std::invalid_argument("config: test_count or test_frac required");
  }
}

namespace {

constexpr std::uint64_t kSplitStream = 0;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t method_stream(Method m) {
  switch (m) {
    case Method::Pca: return 1;
    case Method::PcaRobust: return 2;
    case Method::PcaNaive: return 3;
    case Method::Random: return 4;
  }
  return 0;
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream,
                          Index sample_size, int repetition, int restart) {
  std::uint64_t h = splitmix64(master);
  h = splitmix64(h ^ stream);
  h = splitmix64(h ^ static_cast<std::uint64_t>(sample_size));
  h = splitmix64(h ^ static_cast<std::uint64_t>(repetition + 1));
  h = splitmix64(h ^ static_cast<std::uint64_t>(restart + 2));
  return h;
}

Dataset load_pool(const ExperimentConfig& config) {
  config.validate();
  if (config.synthetic) {
    Rng rng(derive_seed(config.master_seed, 7, 0, 0, 0));
    return gen_power_surface(config.synthetic->count, config.synthetic->exponent, rng);
  }
  return load_csv(config.csv_path);
}

TrialResult run_trial(const ExperimentConfig& config, const Dataset& pool,
                      Method method, Index sample_size, int repetition) {
  SplitSpec spec;
  spec.test_count = config.test_count;
  spec.test_frac = config.test_frac;
  spec.pool_size = sample_size;
  spec.seed = derive_seed(config.master_seed, kSplitStream, sample_size, repetition, -1);
  Splits s = split(pool, spec);

  TransformParams tp = fit_transform_params(s.train, config.scale);
  const Matrix x_train = apply_transform(tp, s.train);
  const Matrix x_val = apply_transform(tp, s.val);
  const Matrix x_sel = apply_transform(tp, s.select);
  const Matrix x_test = apply_transform(tp, s.test);
  const Index q = config.arch.bottleneck_dim();

  TrialResult result;
  result.method = method;
  result.sample_size = sample_size;
  result.repetition = repetition;

  if (method == Method::Pca) {
    PcaModel model = pca_fit(x_train, q);
    Matrix rec = pca_reconstruct(model, pca_project(model, x_test));
    result.test_error = avg_l2(s.test, inverse_transform(tp, rec));
    return result;
  }

  double best_sel = std::numeric_limits<double>::infinity();
  std::optional<AeParams> best;
  int best_restart = -1, best_epochs = 0;
  for (int r = 0; r < config.restarts; ++r) {
    const std::uint64_t seed =
        derive_seed(config.master_seed, method_stream(method), sample_size,
                    repetition, r);
    Rng rng(seed);
    AeParams init = [&] {
      switch (method) {
        case Method::PcaRobust: return pca_robust_init(x_train, config.arch, rng);
        case Method::PcaNaive: return pca_naive_init(x_train, config.arch, rng);
        default: return random_init(config.arch, rng);
      }
    }();
    TrainConfig tc = config.train;
    tc.seed = seed;
    TrainResult trained = train(init, x_train, x_val, tc);
    if (trained.diverged) continue;
    const double sel_err =
        avg_l2(s.select, inverse_transform(tp, forward(trained.best, x_sel)));
    if (sel_err < best_sel) {
      best_sel = sel_err;
      best = trained.best;
      best_restart = r;
      best_epochs = trained.epochs_trained;
    }
  }
  if (!best) {
    result.failed = true;
    return result;
  }
  result.selected_restart = best_restart;
  result.epochs = best_epochs;
  result.test_error = avg_l2(s.test, inverse_transform(tp, forward(*best, x_test)));
  return result;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  config.validate();
  Dataset pool = load_pool(config);

  struct Cell { Method method; Index size; int rep; };
  std::vector<Cell> grid;
  for (Method m : config.methods)
    for (Index size : config.sample_sizes)
      for (int rep = 0; rep < config.repetitions; ++rep)
        grid.push_back({m, size, rep});

  std::vector<TrialResult> trials(grid.size());
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> done{0};
  std::mutex log_mutex;

  unsigned jobs = config.jobs > 0 ? static_cast<unsigned>(config.jobs)
                                  : std::max(1u, std::thread::hardware_concurrency());
  jobs = std::min<unsigned>(jobs, static_cast<unsigned>(grid.size()));

  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= grid.size()) return;
      const Cell& c = grid[i];
      trials[i] = run_trial(config, pool, c.method, c.size, c.rep);
      const std::size_t finished = done.fetch_add(1) + 1;
      std::lock_guard<std::mutex> lock(log_mutex);
      std::fprintf(stderr, "[%zu/%zu] %s size=%lld rep=%d %s\n", finished,
                   grid.size(), method_name(c.method).c_str(),
                   static_cast<long long>(c.size), c.rep,
                   trials[i].failed ? "FAILED" : "done");
    }
  };
  std::vector<std::thread> pool_threads;
  for (unsigned t = 0; t < jobs; ++t) pool_threads.emplace_back(worker);
  for (auto& t : pool_threads) t.join();

  ExperimentResult result;
  result.trials = std::move(trials);
  result.stats = aggregate(result.trials);
  return result;
}

AggregateStats aggregate(const std::vector<TrialResult>& results) {
  if (results.empty()) throw std::invalid_argument("aggregate: no results");
  std::map<std::pair<std::string, Index>, std::vector<double>> values;
  std::map<std::pair<std::string, Index>, int> failures;
  for (const auto& r : results) {
    auto key = std::make_pair(method_name(r.method), r.sample_size);
    if (r.failed) {
      ++failures[key];
      values.try_emplace(key);
    } else {
      values[key].push_back(r.test_error);
    }
  }
  AggregateStats stats;
  for (auto& [key, vals] : values) {
    CellStats cell;
    cell.failures = failures.count(key) ? failures[key] : 0;
    cell.n = static_cast<int>(vals.size());
    if (!vals.empty()) {
      const double mean =
          std::accumulate(vals.begin(), vals.end(), 0.0) / double(vals.size());
      cell.mean = mean;
      if (vals.size() > 1) {
        double ss = 0.0;
        for (double v : vals) ss += (v - mean) * (v - mean);
        cell.sem = std::sqrt(ss / double(vals.size() - 1)) / std::sqrt(double(vals.size()));
      }
    }
    stats.cells[key] = cell;
  }
  return stats;
}

void write_results_csv(const std::vector<TrialResult>& results, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_results_csv: cannot open " + path);
  out << "method,sample_size,repetition,test_error,selected_restart,epochs,failed\n";
  char buf[40];
  for (const auto& r : results) {
    std::snprintf(buf, sizeof(buf), "%.17g", r.test_error);
    out << method_name(r.method) << ',' << r.sample_size << ',' << r.repetition
        << ',' << (r.failed ? "" : buf) << ',' << r.selected_restart << ','
        << r.epochs << ',' << (r.failed ? 1 : 0) << '\n';
  }
}

void write_aggregates_csv(const AggregateStats& stats, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_aggregates_csv: cannot open " + path);
  out << "method,sample_size,mean,sem,n,failures\n";
  char mbuf[40], sbuf[40];
  for (const auto& [key, cell] : stats.cells) {
    std::snprintf(mbuf, sizeof(mbuf), "%.17g", cell.mean);
    std::snprintf(sbuf, sizeof(sbuf), "%.17g", cell.sem);
    out << key.first << ',' << key.second << ',' << (cell.n ? mbuf : "") << ','
        << (cell.n ? sbuf : "") << ',' << cell.n << ',' << cell.failures << '\n';
  }
}

namespace {

void check_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed,
                const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : allowed) {
      if (it.key() == k) { ok = true; break; }
    }
    if (!ok) {
      throw std::invalid_argument("config: unknown key '" + it.key() + "' in " + where);
    }
  }
}

TrainConfig train_from_json(const nlohmann::json& j) {
  check_keys(j, {"learning_rate", "beta1", "beta2", "epsilon", "max_epochs",
                 "patience", "freeze_alphas"},
             "train");
  TrainConfig tc;
  tc.learning_rate = j.value("learning_rate", tc.learning_rate);
  tc.adam_beta1 = j.value("beta1", tc.adam_beta1);
  tc.adam_beta2 = j.value("beta2", tc.adam_beta2);
  tc.adam_epsilon = j.value("epsilon", tc.adam_epsilon);
  tc.max_epochs = j.value("max_epochs", tc.max_epochs);
  tc.patience = j.value("patience", tc.patience);
  tc.freeze_alphas = j.value("freeze_alphas", tc.freeze_alphas);
  return tc;
}

nlohmann::json train_to_json(const TrainConfig& tc) {
  return {{"learning_rate", tc.learning_rate}, {"beta1", tc.adam_beta1},
          {"beta2", tc.adam_beta2},           {"epsilon", tc.adam_epsilon},
          {"max_epochs", tc.max_epochs},      {"patience", tc.patience},
          {"freeze_alphas", tc.freeze_alphas}};
}

}  // namespace

nlohmann::json default_experiment_json() {
  nlohmann::json j;
  j["dataset"] = {{"type", "synthetic"}, {"count", 1000}, {"exponent", 4.0}};
  j["architecture"] = "3-20-3-2-3-20-3";
  j["methods"] = {"pca", "pca-robust", "random"};
  j["sample_sizes"] = {20, 30, 40, 50, 80, 100};
  j["repetitions"] = 50;
  j["restarts"] = 5;
  j["test_count"] = 250;
  j["test_frac"] = 0.0;
  j["scale"] = false;
  j["seed"] = 0;
  j["jobs"] = 0;
  j["train"] = train_to_json(TrainConfig{});
  return j;
}

ExperimentConfig experiment_from_json(const nlohmann::json& j) {
  check_keys(j, {"dataset", "architecture", "methods", "sample_sizes",
                 "repetitions", "restarts", "test_count", "test_frac", "scale",
                 "seed", "jobs", "train"},
             "experiment");
  ExperimentConfig config(Architecture::parse(j.at("architecture").get<std::string>()));
  const auto& ds = j.at("dataset");
  check_keys(ds, {"type", "count", "exponent", "path"}, "dataset");
  const std::string type = ds.at("type").get<std::string>();
  if (type == "synthetic") {
    SyntheticSpec spec;
    spec.count = ds.value("count", spec.count);
    spec.exponent = ds.value("exponent", spec.exponent);
    config.synthetic = spec;
  } else if (type == "csv") {
    config.csv_path = ds.at("path").get<std::string>();
  } else {
    throw std::invalid_argument("config: dataset type must be synthetic or csv");
  }
  for (const auto& name : j.at("methods")) {
    config.methods.push_back(method_from_name(name.get<std::string>()));
  }
  for (const auto& s : j.at("sample_sizes")) {
    config.sample_sizes.push_back(s.get<Index>());
  }
  config.repetitions = j.value("repetitions", config.repetitions);
  config.restarts = j.value("restarts", config.restarts);
  config.test_count = j.value("test_count", config.test_count);
  config.test_frac = j.value("test_frac", config.test_frac);
  config.scale = j.value("scale", config.scale);
  config.master_seed = j.value("seed", config.master_seed);
  config.jobs = j.value("jobs", config.jobs);
  if (j.contains("train")) config.train = train_from_json(j.at("train"));
  config.validate();
  return config;
}

nlohmann::json experiment_to_json(const ExperimentConfig& config) {
  nlohmann::json j;
  if (config.synthetic) {
    j["dataset"] = {{"type", "synthetic"},
                    {"count", config.synthetic->count},
                    {"exponent", config.synthetic->exponent}};
  } else {
    j["dataset"] = {{"type", "csv"}, {"path", config.csv_path}};
  }
  j["architecture"] = config.arch.to_string();
  j["methods"] = nlohmann::json::array();
  for (Method m : config.methods) j["methods"].push_back(method_name(m));
  j["sample_sizes"] = config.sample_sizes;
  j["repetitions"] = config.repetitions;
  j["restarts"] = config.restarts;
  j["test_count"] = config.test_count;
  j["test_frac"] = config.test_frac;
  j["scale"] = config.scale;
  j["seed"] = config.master_seed;
  j["jobs"] = config.jobs;
  j["train"] = train_to_json(config.train);
  return j;
}

}  // namespace pba
