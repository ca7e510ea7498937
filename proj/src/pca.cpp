#include "pba/pca.hpp"

#include <cmath>
#include <limits>

namespace pba {

PcaModel pca_fit(const Matrix& x, Index q, bool scale) {
  require_finite(x, "pca_fit");
  const Index m = x.rows(), n = x.cols();
  if (m < 2) throw std::invalid_argument("pca_fit: need at least 2 rows");
  if (q < 1 || q > std::min(m, n)) {
    throw std::invalid_argument("pca_fit: q out of range");
  }

  PcaModel model;
  model.q = q;
  model.mean = x.colwise().mean();
  model.scale = Vector::Ones(n);
  Matrix centered = x.rowwise() - model.mean.transpose();
  if (scale) {
    // Population std deviation, divisor m.
    for (Index j = 0; j < n; ++j) {
      const double sd = std::sqrt(centered.col(j).squaredNorm() / double(m));
      if (sd <= 0.0) {
        throw std::invalid_argument("pca_fit: zero-variance column " +
                                    std::to_string(j) + " under scaling");
      }
      model.scale(j) = sd;
      centered.col(j) /= sd;
    }
  }

  SvdResult f = svd(centered);
  model.v = f.v.leftCols(q);
  model.s = f.s.head(q);

  // Largest-magnitude entry of each loading column made positive.
  for (Index j = 0; j < q; ++j) {
    Index imax = 0;
    model.v.col(j).cwiseAbs().maxCoeff(&imax);
    if (model.v(imax, j) < 0.0) model.v.col(j) = -model.v.col(j);
  }

  const double cutoff = double(std::max(m, n)) *
                        std::numeric_limits<double>::epsilon() *
                        (f.s.size() > 0 ? f.s(0) : 0.0);
  model.rank_warning = model.s(q - 1) <= cutoff;
  return model;
}

Matrix pca_project(const PcaModel& model, const Matrix& x) {
  if (x.cols() != model.mean.size()) {
    throw std::invalid_argument("pca_project: column count mismatch");
  }
  Matrix t = x.rowwise() - model.mean.transpose();
  t.array().rowwise() /= model.scale.transpose().array();
  return t * model.v;
}

Matrix pca_reconstruct(const PcaModel& model, const Matrix& scores) {
  if (scores.cols() != model.q) {
    throw std::invalid_argument("pca_reconstruct: column count mismatch");
  }
  Matrix t = scores * model.v.transpose();
  t.array().rowwise() *= model.scale.transpose().array();
  return t.rowwise() + model.mean.transpose();
}

double avg_projection_error(const PcaModel& model, const Matrix& x) {
  if (x.rows() == 0) throw std::invalid_argument("avg_projection_error: empty input");
  Matrix rec = pca_reconstruct(model, pca_project(model, x));
  return (x - rec).rowwise().norm().mean();
}

nlohmann::json pca_to_json(const PcaModel& model) {
  nlohmann::json j;
  j["mean"] = std::vector<double>(model.mean.data(), model.mean.data() + model.mean.size());
  j["scale"] = std::vector<double>(model.scale.data(), model.scale.data() + model.scale.size());
  // Column-major flattening of the loadings.
  j["v"] = std::vector<double>(model.v.data(), model.v.data() + model.v.size());
  j["s"] = std::vector<double>(model.s.data(), model.s.data() + model.s.size());
  j["q"] = model.q;
  j["rank_warning"] = model.rank_warning;
  return j;
}

PcaModel pca_from_json(const nlohmann::json& j) {
  PcaModel model;
  auto mean = j.at("mean").get<std::vector<double>>();
  auto scale = j.at("scale").get<std::vector<double>>();
  auto v = j.at("v").get<std::vector<double>>();
  auto s = j.at("s").get<std::vector<double>>();
  model.q = j.at("q").get<Index>();
  model.rank_warning = j.value("rank_warning", false);
  const Index n = static_cast<Index>(mean.size());
  model.mean = Eigen::Map<const Vector>(mean.data(), n);
  model.scale = Eigen::Map<const Vector>(scale.data(), n);
  model.v = Eigen::Map<const Matrix>(v.data(), n, model.q);
  model.s = Eigen::Map<const Vector>(s.data(), model.q);
  return model;
}

}  // namespace pba
