#pragma once

#include <nlohmann/json.hpp>

#include "pba/numlin.hpp"

namespace pba {

/// Rank-q PCA of row-major data (row = sample). Centering and optional
/// per-feature scaling parameters are stored so that project/reconstruct
/// operate on raw, untransformed inputs.
struct PcaModel {
  Vector mean;   // n
  Vector scale;  // n, all ones when unscaled
  Matrix v;      // n x q loadings, orthonormal columns
  Vector s;      // q singular values of the transformed data
  Index q = 0;
  bool rank_warning = false;  // q exceeded the numerical rank of the data
};

/// Fit on x (m x n), keeping the first q principal directions.
/// Each loading column is sign-flipped so its largest-magnitude entry is
/// positive. scale divides each column by its population std deviation.
PcaModel pca_fit(const Matrix& x, Index q, bool scale = false);

/// Scores (m x q) of raw data under the model's transform.
Matrix pca_project(const PcaModel& model, const Matrix& x);

/// Back-map scores to the original units (un-scaled, un-centered).
Matrix pca_reconstruct(const PcaModel& model, const Matrix& scores);

/// Mean over rows of the Euclidean distance between each raw row and its
/// rank-q reconstruction, in original units.
double avg_projection_error(const PcaModel& model, const Matrix& x);

nlohmann::json pca_to_json(const PcaModel& model);
PcaModel pca_from_json(const nlohmann::json& j);

}  // namespace pba
