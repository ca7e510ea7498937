#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "pba/autoenc.hpp"
#include "pba/pcainit.hpp"

using namespace pba;

namespace {

Matrix random_matrix(Index rows, Index cols, Rng& rng) {
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  Matrix m(rows, cols);
  for (Index r = 0; r < rows; ++r)
    for (Index c = 0; c < cols; ++c) m(r, c) = uni(rng);
  return m;
}

AeParams random_net(const Architecture& arch, Rng& rng, bool randomize_alphas) {
  AeParams p = random_init(arch, rng);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  for (auto& b : p.biases)
    for (Index i = 0; i < b.size(); ++i) b(i) = 0.3 * uni(rng);
  if (randomize_alphas) {
    for (auto& a : p.alphas)
      for (Index i = 0; i < a.size(); ++i) a(i) = 0.5 + 0.5 * uni(rng);
  }
  return p;
}

// Central finite differences over every parameter of the net.
void check_gradients(const AeParams& params, const Matrix& x, double h = 1e-5,
                     double rel_tol = 1e-5, double abs_floor = 1e-8) {
  Gradients g = gradients(params, x);
  auto fd = [&](AeParams& p, double& slot) {
    const double saved = slot;
    slot = saved + h;
    const double up = loss(x, forward(p, x));
    slot = saved - h;
    const double down = loss(x, forward(p, x));
    slot = saved;
    return (up - down) / (2.0 * h);
  };
  AeParams p = params;
  for (std::size_t l = 0; l < p.weights.size(); ++l) {
    for (Index r = 0; r < p.weights[l].rows(); ++r) {
      for (Index c = 0; c < p.weights[l].cols(); ++c) {
        const double expected = fd(p, p.weights[l](r, c));
        const double got = g.weights[l](r, c);
        CHECK(std::abs(got - expected) <=
              std::max(abs_floor, rel_tol * std::abs(expected)));
      }
    }
    for (Index i = 0; i < p.biases[l].size(); ++i) {
      const double expected = fd(p, p.biases[l](i));
      CHECK(std::abs(g.biases[l](i) - expected) <=
            std::max(abs_floor, rel_tol * std::abs(expected)));
    }
    for (Index i = 0; i < p.alphas[l].size(); ++i) {
      const double expected = fd(p, p.alphas[l](i));
      CHECK(std::abs(g.alphas[l](i) - expected) <=
            std::max(abs_floor, rel_tol * std::abs(expected)));
    }
  }
}

}  // namespace

TEST_CASE("architecture validation") {
  CHECK(Architecture::parse("3-20-3-2-3-20-3").bottleneck_index == 3);
  CHECK(Architecture::parse("3-20-3-2-3-20-3").bottleneck_dim() == 2);
  CHECK(Architecture::parse("3-20-3-2-3-20-3").is_vase());
  CHECK(Architecture::parse("3-3-2-3-3").is_vase());
  CHECK_FALSE(Architecture::parse("3-2-1-2-3").is_vase());
  CHECK_THROWS_AS(Architecture::parse("3-2-3-2-3"), std::invalid_argument);  // two minima
  CHECK_THROWS_AS(Architecture::parse("3-4-5"), std::invalid_argument);      // ends differ
  CHECK_THROWS_AS(Architecture::parse("2-3-2"), std::invalid_argument);      // q = n
  CHECK_THROWS_AS(Architecture::parse("3"), std::invalid_argument);
  CHECK(Architecture::parse("10-20-10-4-10-20-10").to_string() == "10-20-10-4-10-20-10");
}

TEST_CASE("prelu values and gradients") {
  CHECK(prelu(-2.0, 1.0) == -2.0);  // slope 1: still linear
  CHECK(prelu(3.0, 0.1) == 3.0);
  CHECK(prelu(-2.0, 0.25) == -0.5);
  auto [dz_pos, da_pos] = prelu_grad(3.0, 0.1);
  CHECK(dz_pos == 1.0);
  CHECK(da_pos == 0.0);
  auto [dz_neg, da_neg] = prelu_grad(-2.0, 0.25);
  CHECK(dz_neg == 0.25);
  CHECK(da_neg == -2.0);
}

TEST_CASE("forward with unit slopes and zero biases is the weight product") {
  Rng rng(3);
  Architecture arch = Architecture::parse("3-5-3-2-3-5-3");
  AeParams p = random_init(arch, rng);
  Matrix x = random_matrix(7, 3, rng);
  Matrix product = p.weights[0];
  for (std::size_t i = 1; i < p.weights.size(); ++i) product = product * p.weights[i];
  CHECK((forward(p, x) - x * product).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("forward matches the naive loop evaluator") {
  Rng rng(14);
  Architecture arch = Architecture::parse("4-6-4-2-4-6-4");
  AeParams p = random_net(arch, rng, true);
  Matrix x = random_matrix(9, 4, rng);
  Matrix expected = oracles::naive_forward(p.weights, p.biases, p.alphas,
                                           p.prelu_on_output, x);
  CHECK((forward(p, x) - expected).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("forward rejects shape mismatch") {
  Rng rng(3);
  AeParams p = random_init(Architecture::parse("3-5-3-2-3-5-3"), rng);
  CHECK_THROWS_AS(forward(p, Matrix::Zero(2, 4)), std::invalid_argument);
}

TEST_CASE("loss values") {
  Matrix x(1, 2), y(1, 2);
  x << 0, 0;
  y << 3, 4;
  CHECK(loss(x, x) == 0.0);
  CHECK(loss(x, y) == doctest::Approx(25.0));
  CHECK(avg_l2(x, y) == doctest::Approx(5.0));
  Rng rng(1);
  Matrix a = random_matrix(6, 4, rng), b = random_matrix(6, 4, rng);
  CHECK(loss(a, b) ==
        doctest::Approx(oracles::naive_mean_squared_l2(a, b)).epsilon(1e-12));
}

TEST_CASE("gradients match central finite differences") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Rng rng(100 + seed);
    Architecture arch = Architecture::parse("2-3-1-3-2");
    AeParams p = random_net(arch, rng, true);
    Matrix x = random_matrix(6, 2, rng);
    check_gradients(p, x);
  }
}

TEST_CASE("gradient vanishes at an exact reconstruction") {
  // PCA-replicating init on data inside a rank-1 subspace reproduces the
  // input exactly, so the loss sits at a stationary point.
  Rng rng(8);
  Matrix x(10, 2);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  for (Index i = 0; i < 10; ++i) {
    const double t = uni(rng);
    x(i, 0) = t;
    x(i, 1) = 2.0 * t;
  }
  Matrix centered = x.rowwise() - x.colwise().mean();
  Architecture arch = Architecture::parse("2-4-2-1-2-4-2");
  AeParams p = pca_robust_init(centered, arch, rng);
  Gradients g = gradients(p, centered);
  double norm = 0.0;
  for (const auto& w : g.weights) norm = std::max(norm, w.cwiseAbs().maxCoeff());
  for (const auto& b : g.biases) norm = std::max(norm, b.cwiseAbs().maxCoeff());
  for (const auto& a : g.alphas) norm = std::max(norm, a.cwiseAbs().maxCoeff());
  CHECK(norm < 1e-10);
}

TEST_CASE("alpha gradients are exactly zero when pre-activations are positive") {
  Rng rng(19);
  Architecture arch = Architecture::parse("2-3-1-3-2");
  AeParams p = random_init(arch, rng);
  for (auto& w : p.weights) w = w.cwiseAbs();
  for (auto& b : p.biases) b.setConstant(0.1);
  Matrix x = random_matrix(5, 2, rng).cwiseAbs();
  Gradients g = gradients(p, x);
  for (const auto& a : g.alphas) CHECK(a.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("adam leaves parameters unchanged on zero gradient") {
  Rng rng(4);
  Architecture arch = Architecture::parse("2-3-1-3-2");
  AeParams p = random_init(arch, rng);
  AeParams before = p;
  Gradients g;
  for (const auto& w : p.weights) g.weights.push_back(Matrix::Zero(w.rows(), w.cols()));
  for (const auto& b : p.biases) g.biases.push_back(Vector::Zero(b.size()));
  for (const auto& a : p.alphas) g.alphas.push_back(Vector::Zero(a.size()));
  AdamState state = make_adam_state(p);
  adam_step(p, g, state, TrainConfig{});
  for (std::size_t i = 0; i < p.weights.size(); ++i) {
    CHECK((p.weights[i] - before.weights[i]).norm() == 0.0);
    CHECK((p.biases[i] - before.biases[i]).norm() == 0.0);
    CHECK((p.alphas[i] - before.alphas[i]).norm() == 0.0);
  }
}

TEST_CASE("first adam step is approximately -lr * sign(gradient)") {
  Rng rng(4);
  Architecture arch = Architecture::parse("2-3-1-3-2");
  AeParams p = random_init(arch, rng);
  AeParams before = p;
  Gradients g;
  for (const auto& w : p.weights) {
    Matrix gw(w.rows(), w.cols());
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    for (Index r = 0; r < w.rows(); ++r)
      for (Index c = 0; c < w.cols(); ++c) gw(r, c) = uni(rng) + (uni(rng) > 0 ? 0.5 : -0.5);
    g.weights.push_back(gw);
  }
  for (const auto& b : p.biases) g.biases.push_back(Vector::Zero(b.size()));
  for (const auto& a : p.alphas) g.alphas.push_back(Vector::Zero(a.size()));
  AdamState state = make_adam_state(p);
  TrainConfig tc;
  adam_step(p, g, state, tc);
  for (std::size_t i = 0; i < p.weights.size(); ++i) {
    for (Index r = 0; r < p.weights[i].rows(); ++r) {
      for (Index c = 0; c < p.weights[i].cols(); ++c) {
        const double delta = p.weights[i](r, c) - before.weights[i](r, c);
        const double expected = -tc.learning_rate *
                                (g.weights[i](r, c) > 0 ? 1.0 : -1.0);
        CHECK(delta == doctest::Approx(expected).epsilon(1e-4));
      }
    }
  }
}

TEST_CASE("adam matches a scalar simulation and converges on a 1-D quadratic") {
  // Drive a single weight entry with the gradient of f(w) = (w - 3)^2 and
  // compare against an independently coded scalar Adam.
  Rng rng(4);
  Architecture arch = Architecture::parse("2-3-1-3-2");
  AeParams p = random_init(arch, rng);
  p.weights[0].setZero();
  AdamState state = make_adam_state(p);
  TrainConfig tc;
  tc.learning_rate = 0.1;

  double w_ref = 0.0, m_ref = 0.0, v_ref = 0.0;
  for (int step = 1; step <= 400; ++step) {
    Gradients g;
    for (const auto& w : p.weights) g.weights.push_back(Matrix::Zero(w.rows(), w.cols()));
    for (const auto& b : p.biases) g.biases.push_back(Vector::Zero(b.size()));
    for (const auto& a : p.alphas) g.alphas.push_back(Vector::Zero(a.size()));
    const double grad = 2.0 * (p.weights[0](0, 0) - 3.0);
    g.weights[0](0, 0) = grad;
    adam_step(p, g, state, tc);

    const double grad_ref = 2.0 * (w_ref - 3.0);
    m_ref = tc.adam_beta1 * m_ref + (1 - tc.adam_beta1) * grad_ref;
    v_ref = tc.adam_beta2 * v_ref + (1 - tc.adam_beta2) * grad_ref * grad_ref;
    const double mhat = m_ref / (1 - std::pow(tc.adam_beta1, step));
    const double vhat = v_ref / (1 - std::pow(tc.adam_beta2, step));
    w_ref -= tc.learning_rate * mhat / (std::sqrt(vhat) + tc.adam_epsilon);
    CHECK(p.weights[0](0, 0) == doctest::Approx(w_ref).epsilon(1e-12));
  }
  CHECK(std::abs(p.weights[0](0, 0) - 3.0) < 1e-3);
}

TEST_CASE("train returns the initial parameters when they are already optimal") {
  Rng rng(31);
  Matrix x(12, 2);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  for (Index i = 0; i < 12; ++i) {
    const double t = uni(rng);
    x(i, 0) = t;
    x(i, 1) = -t;
  }
  Matrix centered = x.rowwise() - x.colwise().mean();
  Architecture arch = Architecture::parse("2-4-2-1-2-4-2");
  AeParams init = pca_robust_init(centered, arch, rng);
  TrainConfig tc;
  tc.patience = 1;
  tc.max_epochs = 50;
  TrainResult res = train(init, centered.topRows(9), centered.bottomRows(3), tc);
  CHECK(res.best_epoch == 0);
  for (std::size_t i = 0; i < init.weights.size(); ++i) {
    CHECK((res.best.weights[i] - init.weights[i]).norm() == 0.0);
  }
}

TEST_CASE("best-checkpoint validation loss never exceeds the initial loss") {
  Rng rng(77);
  Matrix data = random_matrix(20, 3, rng);
  Matrix centered = data.rowwise() - data.colwise().mean();
  Architecture arch = Architecture::parse("3-5-3-1-3-5-3");
  AeParams init = pca_robust_init(centered.topRows(15), arch, rng);
  TrainConfig tc;
  tc.max_epochs = 200;
  TrainResult res = train(init, centered.topRows(15), centered.bottomRows(5), tc);
  const double final_val = loss(centered.bottomRows(5),
                                forward(res.best, centered.bottomRows(5)));
  CHECK(final_val <= res.val_history.front() + 1e-15);
  const double min_hist =
      *std::min_element(res.val_history.begin(), res.val_history.end());
  CHECK(final_val == doctest::Approx(min_hist).epsilon(1e-12));
  CHECK(res.val_history.size() == static_cast<std::size_t>(res.epochs_trained) + 1);
}

TEST_CASE("divergence is reported with the epoch index") {
  Rng rng(5);
  Matrix x = 1e3 * random_matrix(8, 2, rng);
  Architecture arch = Architecture::parse("2-3-1-3-2");
  AeParams p = random_init(arch, rng);
  TrainConfig tc;
  tc.learning_rate = 1e150;  // guaranteed overflow
  tc.max_epochs = 50;
  TrainResult res = train(p, x, x, tc);
  CHECK(res.diverged);
  CHECK(res.diverged_epoch >= 0);
}

TEST_CASE("encode/decode composition equals forward") {
  Rng rng(23);
  Architecture arch = Architecture::parse("3-5-3-2-3-5-3");
  AeParams p = random_net(arch, rng, true);
  Matrix x = random_matrix(6, 3, rng);
  Matrix codes = encode(p, x);
  CHECK(codes.cols() == 2);
  CHECK((decode(p, codes) - forward(p, x)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("robust-initialized encoder spans the PCA score subspace") {
  Rng rng(29);
  Matrix data = random_matrix(40, 3, rng);
  Matrix centered = data.rowwise() - data.colwise().mean();
  Architecture arch = Architecture::parse("3-5-3-2-3-5-3");
  PcaModel model = pca_fit(centered, 2);
  AeParams p = pca_robust_init(model, arch, rng);
  Matrix codes = encode(p, centered);
  Matrix scores = pca_project(model, centered);
  // codes = scores * M for an invertible 2x2 map; least-squares residual.
  Matrix map = (scores.transpose() * scores)
                   .ldlt()
                   .solve(scores.transpose() * codes);
  CHECK((scores * map - codes).norm() < 1e-8 * codes.norm());
}

TEST_CASE("json round trip preserves parameters exactly") {
  Rng rng(91);
  Architecture arch = Architecture::parse("3-5-3-2-3-5-3");
  AeParams p = random_net(arch, rng, true);
  AeParams back = ae_from_json(ae_to_json(p));
  CHECK(back.arch == p.arch);
  for (std::size_t i = 0; i < p.weights.size(); ++i) {
    CHECK((back.weights[i] - p.weights[i]).norm() == 0.0);
    CHECK((back.biases[i] - p.biases[i]).norm() == 0.0);
    CHECK((back.alphas[i] - p.alphas[i]).norm() == 0.0);
  }
}
