#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <stdexcept>

namespace pba {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;
using Rng = std::mt19937_64;

/// Thin SVD factors: a = u * diag(s) * v^T with s descending.
struct SvdResult {
  Matrix u;  // m x r
  Vector s;  // r, descending
  Matrix v;  // n x r
};

bool all_finite(const Matrix& a);
void require_finite(const Matrix& a, const char* what);

/// Thin SVD, r = min(rows, cols). Throws std::runtime_error if the
/// underlying solver does not converge.
SvdResult svd(const Matrix& a);

/// Moore-Penrose pseudo-inverse via SVD. Singular values <= tol are
/// zeroed. tol < 0 selects the standard max(m,n) * eps * s_max cutoff.
Matrix pinv(const Matrix& a, double tol = -1.0);

/// Haar-distributed random matrix with orthonormal rows or columns,
/// whichever is the smaller dimension. Gaussian fill, thin QR, columns
/// sign-corrected by the R diagonal.
Matrix random_orthonormal(Index m, Index n, Rng& rng);

/// s_max / s_min; infinity when s_min underflows to zero.
double condition_number(const Matrix& a);

}  // namespace pba
