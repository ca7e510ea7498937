#pragma once

#include <nlohmann/json.hpp>
#include <vector>

#include "pba/autoenc.hpp"
#include "pba/pca.hpp"

namespace pba {

/// Diagnostics of a PCA-replicating initialization.
struct InitReport {
  double pca_equivalence_residual = 0.0;  // max per-row relative deviation
  std::vector<double> prefix_condition_numbers;
  double norm_preservation_residual = 0.0;
  bool pass = false;
};

/// Recursive construction of a weight chain whose product equals `a` while
/// every prefix product stays orthonormal. `arch` lists the widths of the
/// chain including both endpoints; arch[0] = rows(a), arch.back() = cols(a),
/// every width >= rows(a).
std::vector<Matrix> rwi(const Matrix& a, std::vector<Index> arch, Rng& rng);

/// Stable PCA-replicating initialization: non-bottleneck prefix products on
/// both sides are random orthonormal matrices, bottleneck weights solved so
/// the whole net reproduces the rank-q PCA reconstruction of centered data.
/// By default the same random orthonormal seed matrix is used for both
/// sides; independent_decoder draws a fresh one for the decoder.
AeParams pca_robust_init(const Matrix& x_train, const Architecture& arch,
                         Rng& rng, bool independent_decoder = false);
AeParams pca_robust_init(const PcaModel& pca, const Architecture& arch,
                         Rng& rng, bool independent_decoder = false);

/// Non-bottleneck layers random (uniform fan-in scaled); only the bottleneck
/// weights are solved via pseudo-inverses to reproduce PCA. Correct at
/// initialization but with uncontrolled conditioning.
AeParams pca_naive_init(const Matrix& x_train, const Architecture& arch, Rng& rng);
AeParams pca_naive_init(const PcaModel& pca, const Architecture& arch, Rng& rng);

/// Condition numbers of all non-bottleneck prefix products, encoder then
/// decoder side.
std::vector<double> prefix_condition_numbers(const AeParams& params);

/// Evaluates PCA equivalence on the probe rows, prefix-product conditioning
/// and norm preservation. Diagnostic: always returns a report, pass is
/// residual < tol.
InitReport verify_init(const AeParams& params, const Matrix& x_probe,
                       const PcaModel& pca, double tol);

nlohmann::json init_report_to_json(const InitReport& report);

}  // namespace pba
