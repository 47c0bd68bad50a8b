#include <doctest.h>

#include <cmath>

#include "percloud/losses.hpp"
#include "support/test_support.hpp"

using namespace percloud;

namespace {

SparseMatrix random_symmetric_graph(pctest::Rng& rng, Eigen::Index m,
                                    std::uint32_t k) {
  const Matrix coords = pctest::random_coords(rng, m);
  const Matrix feats = pctest::random_gaussian(rng, m, 4);
  return symmetrize_max(build_adjacency(feats, coords, k));
}

}  // namespace

TEST_CASE("smoothness loss hand case: two nodes, d = 1") {
  SparseMatrix w(2, 2);
  w.insert(0, 1) = 1.0;
  w.insert(1, 0) = 1.0;
  Matrix f(2, 1);
  f << 0.0, 2.0;
  const LossTerm t = smoothness_loss(f, w);
  CHECK(doctest::Approx(t.value).epsilon(1e-12) == 4.0);
}

TEST_CASE("smoothness loss vanishes for equal rows with equal degrees") {
  SparseMatrix w(3, 3);
  // triangle, all degrees 2
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      if (i != j) w.insert(i, j) = 1.0;
  Matrix f(3, 2);
  f << 1.5, -2.0, 1.5, -2.0, 1.5, -2.0;
  const double eps = 1e-12;
  const LossTerm t = smoothness_loss(f, w, eps);
  CHECK(t.value <= eps * 6);  // six directed edges
  CHECK(t.value >= 0.0);
}

TEST_CASE("smoothness loss of an empty graph is zero") {
  SparseMatrix w(4, 4);
  const Matrix f = Matrix::Random(4, 3);
  const LossTerm t = smoothness_loss(f, w);
  CHECK(t.value == 0.0);
  CHECK(t.grad.isZero());
}

TEST_CASE("smoothness loss drops isolated-node terms instead of dividing by zero") {
  SparseMatrix w(3, 3);
  w.insert(0, 1) = 1.0;
  w.insert(1, 0) = 1.0;  // node 2 isolated
  Matrix f(3, 1);
  f << 0.0, 2.0, 99.0;
  const LossTerm t = smoothness_loss(f, w);
  CHECK(std::isfinite(t.value));
  CHECK(t.grad.row(2).isZero());
  CHECK(doctest::Approx(t.value).epsilon(1e-12) == 4.0);
}

TEST_CASE("regularization loss hand cases") {
  Matrix orig = Matrix::Zero(2, 2);
  SUBCASE("zero displacement") {
    const LossTerm t = regularization_loss(orig, orig);
    CHECK(t.value <= 2 * 1e-12);
  }
  SUBCASE("a 3-4-5 row") {
    Matrix moved = orig;
    moved.row(0) << 3.0, 4.0;
    const LossTerm t = regularization_loss(moved, orig);
    CHECK(doctest::Approx(t.value).epsilon(1e-12) == 5.0);
    CHECK(doctest::Approx(t.grad(0, 0)).epsilon(1e-9) == 3.0 / 5.0);
  }
  SUBCASE("positive homogeneity") {
    pctest::Rng rng(4);
    const Matrix base = pctest::random_gaussian(rng, 6, 3);
    const Matrix orig6 = Matrix::Zero(6, 3);
    const double l1 = regularization_loss(orig6 + base, orig6).value;
    const double l2 = regularization_loss(orig6 + 2.0 * base, orig6).value;
    CHECK(doctest::Approx(l2).epsilon(1e-9) == 2.0 * l1);
  }
  SUBCASE("shape mismatch throws") {
    CHECK_THROWS_AS(regularization_loss(Matrix::Zero(2, 2), Matrix::Zero(3, 2)),
                    ShapeMismatch);
  }
}

TEST_CASE("total loss weighting") {
  CHECK(total_loss(10.0, 1.0, 0.0) == 1.0);
  CHECK(total_loss(10.0, 1.0, 0.1) == doctest::Approx(2.0));
  CHECK_THROWS_AS(total_loss(std::nan(""), 0.0, 0.1), BadParams);
}

TEST_CASE("cross entropy of uniform logits is ln V") {
  for (const int v : {2, 7, 50}) {
    const Matrix logits = Matrix::Constant(5, v, 0.37);
    const std::vector<int> targets(5, v / 2);
    CHECK(doctest::Approx(cross_entropy_loss(logits, targets)).epsilon(1e-12) ==
          std::log(static_cast<double>(v)));
  }
  CHECK_THROWS_AS(cross_entropy_loss(Matrix::Zero(2, 3), {0}), ShapeMismatch);
  CHECK_THROWS_AS(cross_entropy_loss(Matrix::Zero(1, 3), {5}), BadParams);
}

TEST_CASE("consensus loss identities hold to machine precision") {
  pctest::Rng rng(5);
  const Eigen::Index m = 10, d = 4;
  const SparseMatrix w = random_symmetric_graph(rng, m, 3);
  const Matrix fhat = pctest::random_gaussian(rng, m, d);
  const Matrix forig = pctest::random_gaussian(rng, m, d);

  LossConfig cfg;  // defaults mu = lambda = 0.1
  CHECK(cfg.mu == 0.1);
  CHECK(cfg.lambda == 0.1);

  const double l_pred = 1.25;
  const LossReport report = consensus_loss(fhat, forig, w, cfg, l_pred);
  CHECK(report.l_con == report.l_smt + cfg.mu * report.l_reg);
  CHECK(report.l_total == cfg.lambda * report.l_con + l_pred);
  CHECK(report.l_smt >= 0.0);
  CHECK(report.l_reg >= 0.0);
}

TEST_CASE("smoothness homothety: L(cW) = sqrt(c) L(W)") {
  pctest::Rng rng(6);
  const Eigen::Index m = 12, d = 5;
  const SparseMatrix w = random_symmetric_graph(rng, m, 4);
  const Matrix fhat = pctest::random_gaussian(rng, m, d);

  const double base = smoothness_loss(fhat, w, 1e-12).value;
  for (const double c : {0.25, 4.0}) {
    const SparseMatrix scaled = c * w;
    const double got = smoothness_loss(fhat, scaled, 1e-12).value;
    CHECK(std::abs(got - std::sqrt(c) * base) <= 1e-8 * std::max(1.0, base));
  }
}

TEST_CASE("finite differences: quadratic sanity") {
  const LossFn quadratic = [](const Matrix& x) {
    return std::make_pair(x.squaredNorm(), Matrix(2.0 * x));
  };
  pctest::Rng rng(7);
  const Matrix point = pctest::random_gaussian(rng, 4, 3);
  const FiniteDiffReport r = finite_diff_check(quadratic, point, 1e-5, 1e-9);
  CHECK(r.pass);
  CHECK(r.max_rel_err <= 1e-9);
  CHECK(r.checked == 12);
}

TEST_CASE("finite differences accept the regularization gradient") {
  pctest::Rng rng(8);
  const Matrix forig = pctest::random_gaussian(rng, 6, 4);
  const Matrix point = forig + pctest::random_gaussian(rng, 6, 4);
  const LossFn reg = [&](const Matrix& x) {
    const LossTerm t = regularization_loss(x, forig);
    return std::make_pair(t.value, t.grad);
  };
  const FiniteDiffReport r = finite_diff_check(reg, point, 1e-6, 1e-5);
  CHECK(r.pass);
}

TEST_CASE("finite differences accept the smoothness gradient") {
  for (const std::uint64_t seed : {11ull, 12ull, 13ull}) {
    pctest::Rng rng(seed);
    const Eigen::Index m = 8, d = 4;
    const SparseMatrix w = random_symmetric_graph(rng, m, 3);
    const Matrix point = pctest::random_gaussian(rng, m, d);
    const LossFn smt = [&](const Matrix& x) {
      const LossTerm t = smoothness_loss(x, w);
      return std::make_pair(t.value, t.grad);
    };
    const FiniteDiffReport r = finite_diff_check(smt, point, 1e-6, 1e-5);
    REQUIRE(r.pass);
  }
}

TEST_CASE("finite differences flag a deliberately wrong gradient") {
  const LossFn wrong = [](const Matrix& x) {
    return std::make_pair(x.squaredNorm(), Matrix(4.0 * x));  // 2x too big
  };
  pctest::Rng rng(9);
  const Matrix point = pctest::random_gaussian(rng, 3, 3);
  const FiniteDiffReport r = finite_diff_check(wrong, point, 1e-5, 1e-5);
  CHECK(!r.pass);
}

TEST_CASE("finite differences honor the skip predicate") {
  const LossFn quadratic = [](const Matrix& x) {
    return std::make_pair(x.squaredNorm(), Matrix(2.0 * x));
  };
  const Matrix point = Matrix::Ones(2, 2);
  const FiniteDiffReport r = finite_diff_check(
      quadratic, point, 1e-5, 1e-9,
      [](Eigen::Index i, Eigen::Index) { return i == 0; });
  CHECK(r.checked == 2);
  CHECK(r.skipped == 2);
}

TEST_CASE("loss report serialization") {
  LossReport report;
  report.l_smt = 1.5;
  report.l_reg = 2.0;
  report.l_con = 1.7;
  report.l_total = 0.17;
  pctest::TempDir dir("loss");
  write_loss_report(report, dir.file("l.txt"), "config=42");
  const std::string text = pctest::slurp(dir.file("l.txt"));
  CHECK(text.find("# config=42\n") == 0);
  CHECK(text.find("l_smt=1.5\n") != std::string::npos);
  CHECK(text.find("l_con=1.7") != std::string::npos);
}

TEST_CASE("loss config validation") {
  LossConfig cfg;
  cfg.mu = -1.0;
  CHECK_THROWS_AS(cfg.validate(), BadParams);
  cfg.mu = 0.1;
  cfg.eps_norm = 0.0;
  CHECK_THROWS_AS(cfg.validate(), BadParams);
}
