#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pba/autoenc.hpp"
#include "pba/datagen.hpp"

namespace pba {

enum class Method { Pca, PcaRobust, PcaNaive, Random };

std::string method_name(Method m);
Method method_from_name(const std::string& name);

struct SyntheticSpec {
  Index count = 1000;
  double exponent = 4.0;
};

struct ExperimentConfig {
  std::optional<SyntheticSpec> synthetic;  // exactly one data source set
  std::string csv_path;
  Architecture arch;
  std::vector<Method> methods;
  std::vector<Index> sample_sizes;
  int repetitions = 50;
  int restarts = 5;
  TrainConfig train;
  bool scale = false;
  Index test_count = 250;
  double test_frac = 0.0;
  std::uint64_t master_seed = 0;
  int jobs = 0;  // 0 = hardware concurrency

  explicit ExperimentConfig(Architecture a) : arch(std::move(a)) {}

  void validate() const;
};

struct TrialResult {
  Method method = Method::Pca;
  Index sample_size = 0;
  int repetition = 0;
  double test_error = 0.0;  // mean L2 projection error, original units
  int selected_restart = 0;
  int epochs = 0;
  bool failed = false;
};

struct CellStats {
  double mean = 0.0;
  double sem = 0.0;  // sample std / sqrt(n); 0 when n < 2
  int n = 0;
  int failures = 0;
};

struct AggregateStats {
  // Keyed by (method name, sample size).
  std::map<std::pair<std::string, Index>, CellStats> cells;
};

/// Deterministic seed tree: every per-trial seed is derived from the master
/// seed and the grid coordinates by splitmix64 mixing, so any subset of the
/// grid can be reproduced in isolation. `restart` is -1 for the split seed
/// shared by all methods of a (size, repetition) cell.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream,
                          Index sample_size, int repetition, int restart);

/// Materialize the data pool (synthetic generation or CSV load).
Dataset load_pool(const ExperimentConfig& config);

TrialResult run_trial(const ExperimentConfig& config, const Dataset& pool,
                      Method method, Index sample_size, int repetition);

struct ExperimentResult {
  std::vector<TrialResult> trials;  // sorted by (method, size, repetition)
  AggregateStats stats;
};

ExperimentResult run_experiment(const ExperimentConfig& config);

AggregateStats aggregate(const std::vector<TrialResult>& results);

void write_results_csv(const std::vector<TrialResult>& results, const std::string& path);
void write_aggregates_csv(const AggregateStats& stats, const std::string& path);

nlohmann::json default_experiment_json();
/// Strict parse: unknown keys are rejected.
ExperimentConfig experiment_from_json(const nlohmann::json& j);
nlohmann::json experiment_to_json(const ExperimentConfig& config);

}  // namespace pba
