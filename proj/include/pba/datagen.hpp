#pragma once

#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "pba/numlin.hpp"

namespace pba {

struct Dataset {
  Matrix x;
  std::vector<std::string> feature_names;  // optional, may be empty
  Vector center;  // applied transform; zeros when untransformed
  Vector scale;   // ones when untransformed
  bool is_transformed = false;
};

Dataset make_dataset(Matrix x, std::vector<std::string> names = {});

/// Random points (x, y) uniform on [0,1]^2 with z = x^n + y^n.
Dataset gen_power_surface(Index count, double exponent, Rng& rng);

/// Rectangular numeric CSV with an optional header row (auto-detected when
/// the first row has any non-numeric cell). Throws std::runtime_error with
/// row/column location on ragged or non-numeric input.
Dataset load_csv(const std::string& path);

/// 17-significant-digit decimal serialization; load(save(d)) is exact.
void save_csv(const Dataset& d, const std::string& path);

struct TransformParams {
  Vector center;
  Vector scale;  // ones when scaling disabled
};

/// Column means (and per-column population std deviations when scale is
/// set) of the given rows. Fit on the training split only.
TransformParams fit_transform_params(const Matrix& train, bool scale);

Matrix apply_transform(const TransformParams& p, const Matrix& x);
Matrix inverse_transform(const TransformParams& p, const Matrix& x);

Dataset fit_transform(const Dataset& d, bool scale, TransformParams& params_out);

struct SplitSpec {
  double train_frac = 0.8;
  double val_frac = 0.1;
  double select_frac = 0.1;
  Index test_count = 0;    // fixed held-out count; takes precedence when > 0
  double test_frac = 0.0;  // used when test_count == 0
  Index pool_size = 0;     // 0 = use the whole non-test remainder
  std::uint64_t seed = 0;
};

struct Splits {
  Matrix train, val, select, test;
  std::vector<Index> train_idx, val_idx, select_idx, test_idx;
};

/// Test rows are drawn first, then a pool of pool_size rows from the
/// remainder, split train/val/select. Fractional sizes: floor for val and
/// select, remainder to train. Deterministic per seed.
Splits split(const Dataset& d, const SplitSpec& spec);

/// Index manifest for auditing a split.
nlohmann::json split_manifest(const Splits& s);

}  // namespace pba
