#include "pba/numlin.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>
#include <limits>
#include <string>

namespace pba {

bool all_finite(const Matrix& a) { return a.allFinite(); }

void require_finite(const Matrix& a, const char* what) {
  if (!a.allFinite()) {
    throw std::invalid_argument(std::string(what) + ": non-finite entries");
  }
}

SvdResult svd(const Matrix& a) {
  require_finite(a, "svd");
  Eigen::JacobiSVD<Matrix> dec(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (dec.info() != Eigen::Success) {
    throw std::runtime_error("svd: solver failed to converge after " +
                             std::to_string(dec.nonzeroSingularValues()) +
                             " computed values");
  }
  return SvdResult{dec.matrixU(), dec.singularValues(), dec.matrixV()};
}

Matrix pinv(const Matrix& a, double tol) {
  SvdResult f = svd(a);
  const double smax = f.s.size() > 0 ? f.s(0) : 0.0;
  if (tol < 0.0) {
    tol = static_cast<double>(std::max(a.rows(), a.cols())) *
          std::numeric_limits<double>::epsilon() * smax;
  }
  Vector sinv = Vector::Zero(f.s.size());
  for (Index i = 0; i < f.s.size(); ++i) {
    if (f.s(i) > tol) sinv(i) = 1.0 / f.s(i);
  }
  return f.v * sinv.asDiagonal() * f.u.transpose();
}

Matrix random_orthonormal(Index m, Index n, Rng& rng) {
  if (m < n) return random_orthonormal(n, m, rng).transpose();
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix g(m, n);
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < n; ++j) g(i, j) = gauss(rng);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(m, n);
  Matrix r = qr.matrixQR().topRows(n).triangularView<Eigen::Upper>();
  // Sign correction makes the distribution exactly Haar.
  for (Index j = 0; j < n; ++j) {
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  }
  return q;
}

double condition_number(const Matrix& a) {
  SvdResult f = svd(a);
  const double smin = f.s(f.s.size() - 1);
  if (smin <= 0.0) return std::numeric_limits<double>::infinity();
  return f.s(0) / smin;
}

}  // namespace pba
