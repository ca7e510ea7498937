#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "pba/datagen.hpp"
#include "pba/pcainit.hpp"

using namespace pba;

namespace {

Matrix centered_surface(Index count, double exponent, std::uint64_t seed) {
  Rng rng(seed);
  Dataset d = gen_power_surface(count, exponent, rng);
  return d.x.rowwise() - d.x.colwise().mean();
}

Matrix chain_product(const std::vector<Matrix>& chain) {
  Matrix p = chain.front();
  for (std::size_t i = 1; i < chain.size(); ++i) p = p * chain[i];
  return p;
}

}  // namespace

TEST_CASE("rwi base case returns the target unchanged") {
  Rng rng(1);
  Matrix a = random_orthonormal(3, 20, rng);
  auto chain = rwi(a, {3, 20}, rng);
  REQUIRE(chain.size() == 1);
  CHECK((chain[0] - a).norm() == 0.0);
}

TEST_CASE("rwi factorizes a square orthonormal target through a wide layer") {
  Rng rng(2);
  Matrix a = random_orthonormal(3, 3, rng);
  auto chain = rwi(a, {3, 20, 3}, rng);
  REQUIRE(chain.size() == 2);
  CHECK(chain[0].rows() == 3);
  CHECK(chain[0].cols() == 20);
  CHECK(chain[1].rows() == 20);
  CHECK(chain[1].cols() == 3);
  CHECK((chain_product(chain) - a).norm() < 1e-10 * a.norm());
}

TEST_CASE("rwi chains preserve norms and stay perfectly conditioned") {
  Rng rng(3);
  Matrix a = random_orthonormal(5, 5, rng);
  auto chain = rwi(a, {5, 20, 8, 5}, rng);
  REQUIRE(chain.size() == 3);
  Matrix prefix = chain[0];
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (std::size_t i = 0;; ++i) {
    CHECK(condition_number(prefix) < 1.0 + 1e-8);
    for (int t = 0; t < 100; ++t) {
      Vector x(5);
      for (Index k = 0; k < 5; ++k) x(k) = gauss(rng);
      CHECK(std::abs((prefix.transpose() * x).norm() - x.norm()) < 1e-10 * x.norm());
    }
    if (i + 1 >= chain.size()) break;
    prefix = prefix * chain[i + 1];
  }
  CHECK((prefix - a).norm() < 1e-10);
}

TEST_CASE("rwi rejects widths below the input dimension") {
  Rng rng(4);
  Matrix a = random_orthonormal(3, 3, rng);
  CHECK_THROWS_AS(rwi(a, {3, 2, 3}, rng), std::invalid_argument);
  CHECK_THROWS_AS(rwi(a, {4, 20, 3}, rng), std::invalid_argument);
}

TEST_CASE("robust init replicates PCA on the paper's synthetic setting") {
  Matrix train = centered_surface(40, 4.0, 10);
  Matrix test = centered_surface(100, 4.0, 11);
  Architecture arch = Architecture::parse("3-20-3-2-3-20-3");
  Rng rng(5);
  PcaModel model = pca_fit(train, 2);
  AeParams p = pca_robust_init(model, arch, rng);
  Matrix ae_out = forward(p, test);
  Matrix pca_out = pca_reconstruct(model, pca_project(model, test));
  CHECK((ae_out - pca_out).norm() < 1e-8 * pca_out.norm());
}

TEST_CASE("robust init on the minimal vase") {
  Matrix train = centered_surface(30, 4.0, 20);
  Architecture arch = Architecture::parse("3-3-2-3-3");
  Rng rng(6);
  PcaModel model = pca_fit(train, 2);
  AeParams p = pca_robust_init(model, arch, rng);
  Matrix pca_out = pca_reconstruct(model, pca_project(model, train));
  CHECK((forward(p, train) - pca_out).norm() < 1e-8 * pca_out.norm());
}

TEST_CASE("robust prefix products are perfectly conditioned") {
  Matrix train = centered_surface(50, 4.0, 30);
  Architecture arch = Architecture::parse("3-20-3-2-3-20-3");
  Rng rng(7);
  AeParams p = pca_robust_init(train, arch, rng);
  for (double c : prefix_condition_numbers(p)) CHECK(c < 1.0 + 1e-8);
}

TEST_CASE("independent decoder seed matrix still replicates PCA") {
  Matrix train = centered_surface(40, 4.0, 40);
  Architecture arch = Architecture::parse("3-20-3-2-3-20-3");
  Rng rng(8);
  PcaModel model = pca_fit(train, 2);
  AeParams p = pca_robust_init(model, arch, rng, /*independent_decoder=*/true);
  Matrix pca_out = pca_reconstruct(model, pca_project(model, train));
  CHECK((forward(p, train) - pca_out).norm() < 1e-8 * pca_out.norm());
}

TEST_CASE("naive init replicates PCA at a looser tolerance") {
  Matrix train = centered_surface(40, 4.0, 50);
  Architecture arch = Architecture::parse("3-20-3-2-3-20-3");
  Rng rng(9);
  PcaModel model = pca_fit(train, 2);
  AeParams p = pca_naive_init(model, arch, rng);
  Matrix pca_out = pca_reconstruct(model, pca_project(model, train));
  CHECK((forward(p, train) - pca_out).norm() < 1e-6 * pca_out.norm());
}

TEST_CASE("degenerate vase: naive and robust both assign the loadings directly") {
  Matrix train = centered_surface(30, 4.0, 60);
  Architecture arch = Architecture::parse("3-2-3");
  PcaModel model = pca_fit(train, 2);
  Rng rng1(10), rng2(11);
  AeParams robust = pca_robust_init(model, arch, rng1);
  AeParams naive = pca_naive_init(model, arch, rng2);
  CHECK((robust.weights[0] - model.v).norm() < 1e-12);
  CHECK((naive.weights[0] - model.v).norm() < 1e-12);
  CHECK((robust.weights[1] - model.v.transpose()).norm() < 1e-12);
}

TEST_CASE("naive prefix products are markedly worse conditioned than robust") {
  Matrix train = 0.1 * Matrix::Random(60, 30);
  Matrix centered = train.rowwise() - train.colwise().mean();
  Architecture arch = Architecture::parse("30-100-30-15-30-100-30");
  std::vector<double> naive_conds;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(seed);
    AeParams naive = pca_naive_init(centered, arch, rng);
    for (double c : prefix_condition_numbers(naive)) naive_conds.push_back(c);
  }
  std::sort(naive_conds.begin(), naive_conds.end());
  const double median = naive_conds[naive_conds.size() / 2];
  Rng rng(99);
  AeParams robust = pca_robust_init(centered, arch, rng);
  for (double c : prefix_condition_numbers(robust)) CHECK(c < 1.0 + 1e-8);
  CHECK(median > 10.0);
}

TEST_CASE("verify_init on robust, naive and random nets") {
  Matrix train = centered_surface(40, 4.0, 70);
  Matrix probe = centered_surface(100, 4.0, 71);
  Architecture arch = Architecture::parse("3-20-3-2-3-20-3");
  PcaModel model = pca_fit(train, 2);

  Rng rng(12);
  InitReport robust = verify_init(pca_robust_init(model, arch, rng), probe, model, 1e-8);
  CHECK(robust.pass);
  CHECK(robust.pca_equivalence_residual < 1e-8);
  CHECK(robust.norm_preservation_residual < 1e-10);
  for (double c : robust.prefix_condition_numbers) CHECK(c < 1.0 + 1e-8);

  InitReport naive = verify_init(pca_naive_init(model, arch, rng), probe, model, 1e-6);
  CHECK(naive.pass);
  CHECK(naive.pca_equivalence_residual < 1e-6);

  InitReport random = verify_init(random_init(arch, rng), probe, model, 1e-6);
  CHECK_FALSE(random.pass);
  CHECK(random.pca_equivalence_residual > 0.1);
}

TEST_CASE("identical seeds give bit-identical parameters") {
  Matrix train = centered_surface(40, 4.0, 80);
  Architecture arch = Architecture::parse("3-20-3-2-3-20-3");
  Rng rng1(123), rng2(123);
  AeParams a = pca_robust_init(train, arch, rng1);
  AeParams b = pca_robust_init(train, arch, rng2);
  for (std::size_t i = 0; i < a.weights.size(); ++i) {
    CHECK(a.weights[i] == b.weights[i]);
  }
}

TEST_CASE("vase violations are rejected") {
  Matrix train = centered_surface(40, 4.0, 90);
  Rng rng(13);
  CHECK_THROWS_AS(pca_robust_init(train, Architecture::parse("3-2-3-1-3-2-3"), rng),
                  std::invalid_argument);
  CHECK_THROWS_AS(pca_naive_init(train, Architecture::parse("3-20-4-2-4-20-3"), rng),
                  std::invalid_argument);
}

TEST_CASE("rank-deficient training data propagates the warning flag") {
  Matrix x(20, 3);
  for (Index i = 0; i < 20; ++i) {
    x(i, 0) = double(i);
    x(i, 1) = 2.0 * double(i);
    x(i, 2) = -0.5 * double(i);
  }
  Matrix centered = x.rowwise() - x.colwise().mean();
  Rng rng(14);
  AeParams p = pca_robust_init(centered, Architecture::parse("3-20-3-2-3-20-3"), rng);
  CHECK(p.rank_warning);
}
