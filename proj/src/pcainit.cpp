#include "pba/pcainit.hpp"

#include <cmath>

namespace pba {

std::vector<Matrix> rwi(const Matrix& a, std::vector<Index> arch, Rng& rng) {
  if (arch.size() < 2) throw std::invalid_argument("rwi: arch needs >= 2 widths");
  if (arch.front() != a.rows() || arch.back() != a.cols()) {
    throw std::invalid_argument("rwi: arch endpoints must match the target shape");
  }
  for (Index w : arch) {
    if (w < a.rows()) {
      throw std::invalid_argument("rwi: every width must be >= the input dimension");
    }
  }
  if (arch.size() <= 2) return {a};
  arch.pop_back();
  Matrix b = random_orthonormal(arch.front(), arch.back(), rng);
  // b has orthonormal rows, so its pseudo-inverse is its transpose.
  Matrix w = b.transpose() * a;
  std::vector<Matrix> chain = rwi(b, std::move(arch), rng);
  chain.push_back(std::move(w));
  return chain;
}

namespace {

std::vector<Index> encoder_widths(const Architecture& arch) {
  return {arch.widths.begin(),
          arch.widths.begin() + static_cast<std::ptrdiff_t>(arch.bottleneck_index)};
}

std::vector<Index> decoder_widths(const Architecture& arch) {
  return {arch.widths.begin() + static_cast<std::ptrdiff_t>(arch.bottleneck_index) + 1,
          arch.widths.end()};
}

Matrix chain_product(const std::vector<Matrix>& chain) {
  Matrix p = chain.front();
  for (std::size_t i = 1; i < chain.size(); ++i) p = p * chain[i];
  return p;
}

AeParams assemble(const Architecture& arch, const PcaModel& pca,
                  std::vector<Matrix> enc, std::vector<Matrix> dec) {
  const Index n = arch.input_dim();
  const Matrix enc_product = enc.empty() ? Matrix::Identity(n, n) : chain_product(enc);
  const Matrix dec_product = dec.empty() ? Matrix::Identity(n, n) : chain_product(dec);
  // Bottleneck weights solve the PCA-replication equation; the loadings
  // have orthonormal columns so their pseudo-inverse is the transpose.
  Matrix w_enc = pinv(enc_product) * pca.v;
  Matrix w_dec = pca.v.transpose() * pinv(dec_product);

  AeParams params(arch);
  std::size_t k = 0;
  for (auto& w : enc) params.weights[k++] = std::move(w);
  params.weights[k++] = std::move(w_enc);
  params.weights[k++] = std::move(w_dec);
  for (auto& w : dec) params.weights[k++] = std::move(w);
  params.rank_warning = pca.rank_warning;
  return params;
}

}  // namespace

AeParams pca_robust_init(const PcaModel& pca, const Architecture& arch, Rng& rng,
                         bool independent_decoder) {
  arch.require_vase();
  const Index n = arch.input_dim();
  if (pca.q != arch.bottleneck_dim() || pca.mean.size() != n) {
    throw std::invalid_argument("pca_robust_init: model does not match the architecture");
  }
  const Matrix a = random_orthonormal(n, n, rng);
  std::vector<Matrix> enc, dec;
  if (arch.bottleneck_index >= 2) enc = rwi(a, encoder_widths(arch), rng);
  if (arch.bottleneck_index + 2 < arch.widths.size()) {
    const Matrix a_dec = independent_decoder ? random_orthonormal(n, n, rng) : a;
    dec = rwi(a_dec, decoder_widths(arch), rng);
  }
  return assemble(arch, pca, std::move(enc), std::move(dec));
}

AeParams pca_robust_init(const Matrix& x_train, const Architecture& arch, Rng& rng,
                         bool independent_decoder) {
  return pca_robust_init(pca_fit(x_train, arch.bottleneck_dim()), arch, rng,
                         independent_decoder);
}

AeParams pca_naive_init(const PcaModel& pca, const Architecture& arch, Rng& rng) {
  arch.require_vase();
  const Index n = arch.input_dim();
  if (pca.q != arch.bottleneck_dim() || pca.mean.size() != n) {
    throw std::invalid_argument("pca_naive_init: model does not match the architecture");
  }
  AeParams random = random_init(arch, rng);
  std::vector<Matrix> enc(random.weights.begin(),
                          random.weights.begin() + arch.bottleneck_index - 1);
  std::vector<Matrix> dec(random.weights.begin() + arch.bottleneck_index + 1,
                          random.weights.end());
  return assemble(arch, pca, std::move(enc), std::move(dec));
}

AeParams pca_naive_init(const Matrix& x_train, const Architecture& arch, Rng& rng) {
  return pca_naive_init(pca_fit(x_train, arch.bottleneck_dim()), arch, rng);
}

std::vector<double> prefix_condition_numbers(const AeParams& params) {
  std::vector<double> conds;
  const std::size_t b = params.arch.bottleneck_index;
  auto walk = [&](std::size_t begin, std::size_t end) {
    Matrix p = params.weights[begin];
    conds.push_back(condition_number(p));
    for (std::size_t i = begin + 1; i < end; ++i) {
      p = p * params.weights[i];
      conds.push_back(condition_number(p));
    }
  };
  if (b >= 2) walk(0, b - 1);                           // encoder non-bottleneck
  if (b + 1 < params.weights.size()) walk(b + 1, params.weights.size());  // decoder
  return conds;
}

InitReport verify_init(const AeParams& params, const Matrix& x_probe,
                       const PcaModel& pca, double tol) {
  InitReport report;

  Matrix ae_out = forward(params, x_probe);
  Matrix pca_out = pca_reconstruct(pca, pca_project(pca, x_probe));
  const double overall =
      std::max(pca_out.norm() / std::sqrt(double(std::max<Index>(1, pca_out.rows()))),
               1e-30);
  for (Index r = 0; r < x_probe.rows(); ++r) {
    const double denom = std::max(pca_out.row(r).norm(), overall);
    report.pca_equivalence_residual =
        std::max(report.pca_equivalence_residual,
                 (ae_out.row(r) - pca_out.row(r)).norm() / denom);
  }

  report.prefix_condition_numbers = prefix_condition_numbers(params);

  // Norm preservation of each non-bottleneck prefix product, probed with
  // fixed random vectors.
  Rng rng(0x9e3779b97f4a7c15ULL);
  const Index n = params.arch.input_dim();
  std::normal_distribution<double> gauss(0.0, 1.0);
  const std::size_t b = params.arch.bottleneck_index;
  auto probe_side = [&](std::size_t begin, std::size_t end) {
    Matrix p = params.weights[begin];
    for (std::size_t i = begin; i < end; ++i) {
      if (i > begin) p = p * params.weights[i];
      if (p.rows() != n) continue;  // only n-input products are norm preserving
      for (int t = 0; t < 100; ++t) {
        Vector x(n);
        for (Index k = 0; k < n; ++k) x(k) = gauss(rng);
        const double nx = x.norm();
        report.norm_preservation_residual =
            std::max(report.norm_preservation_residual,
                     std::abs((p.transpose() * x).norm() - nx) / nx);
      }
    }
  };
  if (b >= 2) probe_side(0, b - 1);
  if (b + 1 < params.weights.size()) probe_side(b + 1, params.weights.size());

  report.pass = report.pca_equivalence_residual < tol;
  return report;
}

nlohmann::json init_report_to_json(const InitReport& report) {
  nlohmann::json j;
  j["pca_equivalence_residual"] = report.pca_equivalence_residual;
  j["prefix_condition_numbers"] = report.prefix_condition_numbers;
  j["norm_preservation_residual"] = report.norm_preservation_residual;
  j["pass"] = report.pass;
  return j;
}

}  // namespace pba
