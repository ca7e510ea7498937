#include "pba/datagen.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <sstream>

namespace pba {

Dataset make_dataset(Matrix x, std::vector<std::string> names) {
  require_finite(x, "make_dataset");
  Dataset d;
  d.center = Vector::Zero(x.cols());
  d.scale = Vector::Ones(x.cols());
  d.x = std::move(x);
  d.feature_names = std::move(names);
  return d;
}

Dataset gen_power_surface(Index count, double exponent, Rng& rng) {
  if (count < 1) throw std::invalid_argument("gen_power_surface: count < 1");
  if (exponent < 1.0) throw std::invalid_argument("gen_power_surface: exponent < 1");
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Matrix x(count, 3);
  for (Index i = 0; i < count; ++i) {
    const double a = unit(rng);
    const double b = unit(rng);
    x(i, 0) = a;
    x(i, 1) = b;
    x(i, 2) = std::pow(a, exponent) + std::pow(b, exponent);
  }
  return make_dataset(std::move(x), {"x", "y", "z"});
}

namespace {

bool parse_cell(const std::string& cell, double& out) {
  const char* begin = cell.c_str();
  char* end = nullptr;
  errno = 0;
  out = std::strtod(begin, &end);
  if (end == begin || errno == ERANGE) return false;
  while (*end == ' ' || *end == '\t' || *end == '\r') ++end;
  return *end == '\0';
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  std::stringstream ss(line);
  while (std::getline(ss, cur, ',')) cells.push_back(cur);
  if (!line.empty() && line.back() == ',') cells.push_back("");
  return cells;
}

}  // namespace

Dataset load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_csv: cannot open " + path);

  std::vector<std::vector<double>> rows;
  std::vector<std::string> names;
  std::string line;
  std::size_t lineno = 0;
  std::size_t ncols = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = split_line(line);
    if (first) {
      first = false;
      ncols = cells.size();
      bool numeric = true;
      std::vector<double> vals(cells.size());
      for (std::size_t j = 0; j < cells.size(); ++j) {
        if (!parse_cell(cells[j], vals[j])) { numeric = false; break; }
      }
      if (numeric) {
        rows.push_back(std::move(vals));
      } else {
        names.assign(cells.begin(), cells.end());
      }
      continue;
    }
    if (cells.size() != ncols) {
      throw std::runtime_error("load_csv: ragged row at line " +
                               std::to_string(lineno) + " (expected " +
                               std::to_string(ncols) + " cells, got " +
                               std::to_string(cells.size()) + ")");
    }
    std::vector<double> vals(cells.size());
    for (std::size_t j = 0; j < cells.size(); ++j) {
      if (!parse_cell(cells[j], vals[j])) {
        throw std::runtime_error("load_csv: non-numeric cell at line " +
                                 std::to_string(lineno) + ", column " +
                                 std::to_string(j + 1));
      }
    }
    rows.push_back(std::move(vals));
  }
  if (rows.empty()) throw std::runtime_error("load_csv: no data rows in " + path);

  Matrix x(static_cast<Index>(rows.size()), static_cast<Index>(ncols));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < ncols; ++j)
      x(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
  return make_dataset(std::move(x), std::move(names));
}

void save_csv(const Dataset& d, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_csv: cannot open " + path);
  if (!d.feature_names.empty()) {
    for (std::size_t j = 0; j < d.feature_names.size(); ++j) {
      if (j) out << ',';
      out << d.feature_names[j];
    }
    out << '\n';
  }
  char buf[40];
  for (Index i = 0; i < d.x.rows(); ++i) {
    for (Index j = 0; j < d.x.cols(); ++j) {
      if (j) out << ',';
      std::snprintf(buf, sizeof(buf), "%.17g", d.x(i, j));
      out << buf;
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("save_csv: write failed for " + path);
}

TransformParams fit_transform_params(const Matrix& train, bool scale) {
  TransformParams p;
  p.center = train.colwise().mean();
  p.scale = Vector::Ones(train.cols());
  if (scale) {
    Matrix centered = train.rowwise() - p.center.transpose();
    for (Index j = 0; j < train.cols(); ++j) {
      const double sd =
          std::sqrt(centered.col(j).squaredNorm() / double(train.rows()));
      if (sd <= 0.0) {
        throw std::invalid_argument("fit_transform_params: zero-variance column " +
                                    std::to_string(j));
      }
      p.scale(j) = sd;
    }
  }
  return p;
}

Matrix apply_transform(const TransformParams& p, const Matrix& x) {
  Matrix t = x.rowwise() - p.center.transpose();
  t.array().rowwise() /= p.scale.transpose().array();
  return t;
}

Matrix inverse_transform(const TransformParams& p, const Matrix& x) {
  Matrix t = x;
  t.array().rowwise() *= p.scale.transpose().array();
  return t.rowwise() + p.center.transpose();
}

Dataset fit_transform(const Dataset& d, bool scale, TransformParams& params_out) {
  if (d.is_transformed) {
    throw std::invalid_argument("fit_transform: dataset already transformed");
  }
  params_out = fit_transform_params(d.x, scale);
  Dataset t;
  t.x = apply_transform(params_out, d.x);
  t.feature_names = d.feature_names;
  t.center = params_out.center;
  t.scale = params_out.scale;
  t.is_transformed = true;
  return t;
}

Splits split(const Dataset& d, const SplitSpec& spec) {
  const Index m = d.x.rows();
  std::vector<Index> idx(static_cast<std::size_t>(m));
  std::iota(idx.begin(), idx.end(), Index{0});
  Rng rng(spec.seed);
  std::shuffle(idx.begin(), idx.end(), rng);

  Index ntest = spec.test_count > 0
                    ? spec.test_count
                    : static_cast<Index>(std::floor(double(m) * spec.test_frac));
  if (ntest < 1 || ntest >= m) {
    throw std::invalid_argument("split: test split empty or exhausts the data");
  }
  const Index remainder = m - ntest;
  Index pool = spec.pool_size > 0 ? spec.pool_size : remainder;
  if (pool > remainder) {
    throw std::invalid_argument("split: pool_size exceeds available rows");
  }
  const double frac_sum = spec.train_frac + spec.val_frac + spec.select_frac;
  if (std::abs(frac_sum - 1.0) > 1e-9) {
    throw std::invalid_argument("split: train/val/select fractions must sum to 1");
  }
  // Floor for val and select, remainder to train.
  const Index nval = static_cast<Index>(std::floor(double(pool) * spec.val_frac));
  const Index nsel = static_cast<Index>(std::floor(double(pool) * spec.select_frac));
  const Index ntrain = pool - nval - nsel;
  if (ntrain < 1 || nval < 1 || nsel < 1) {
    throw std::invalid_argument("split: empty train/val/select split (pool " +
                                std::to_string(pool) + ")");
  }

  Splits s;
  auto take = [&](Index offset, Index count) {
    std::vector<Index> out(idx.begin() + offset, idx.begin() + offset + count);
    return out;
  };
  s.test_idx = take(0, ntest);
  s.train_idx = take(ntest, ntrain);
  s.val_idx = take(ntest + ntrain, nval);
  s.select_idx = take(ntest + ntrain + nval, nsel);

  auto gather = [&](const std::vector<Index>& which) {
    Matrix out(static_cast<Index>(which.size()), d.x.cols());
    for (std::size_t i = 0; i < which.size(); ++i)
      out.row(static_cast<Index>(i)) = d.x.row(which[i]);
    return out;
  };
  s.test = gather(s.test_idx);
  s.train = gather(s.train_idx);
  s.val = gather(s.val_idx);
  s.select = gather(s.select_idx);
  return s;
}

nlohmann::json split_manifest(const Splits& s) {
  nlohmann::json j;
  j["train"] = s.train_idx;
  j["val"] = s.val_idx;
  j["select"] = s.select_idx;
  j["test"] = s.test_idx;
  return j;
}

}  // namespace pba
