#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>
#include <numbers>

#include "sentalign/errors.hpp"
#include "sentalign/linalg.hpp"
#include "sentalign/solvers.hpp"
#include "sentalign/synth.hpp"
#include "support.hpp"

using namespace sentalign;
using testing::naive_frobenius;
using testing::naive_max_abs_diff;
using testing::naive_multiply;
using testing::random_matrix;

namespace {

ParallelCorpus corpus_of(const Matrix& a, const Matrix& b) {
  return ParallelCorpus(EmbeddingMatrix(a), EmbeddingMatrix(b));
}

double objective(const Matrix& a, const Matrix& b, const Matrix& p) {
  return naive_frobenius(subtract(naive_multiply(a, p), b));
}

// Smallest ||A Q - B||_F over 2x2 rotations and reflections sampled every
// `step` radians.
double sweep_orthogonal_2x2(const Matrix& a, const Matrix& b, double step) {
  double best = std::numeric_limits<double>::infinity();
  const auto steps = static_cast<int>(std::ceil(2.0 * std::numbers::pi / step));
  for (int k = 0; k < steps; ++k) {
    const double t = k * step;
    const double c = std::cos(t);
    const double s = std::sin(t);
    const Matrix rot{{c, -s}, {s, c}};
    const Matrix refl{{c, s}, {s, -c}};
    best = std::min({best, objective(a, b, rot), objective(a, b, refl)});
  }
  return best;
}

Matrix eigen_pinv_solution(const Matrix& a, const Matrix& b) {
  Eigen::MatrixXd ea(a.rows(), a.cols());
  Eigen::MatrixXd eb(b.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) ea(i, j) = a(i, j);
    for (std::size_t j = 0; j < b.cols(); ++j) eb(i, j) = b(i, j);
  }
  const Eigen::MatrixXd x = ea.completeOrthogonalDecomposition().pseudoInverse() * eb;
  Matrix out(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) out(i, j) = x(i, j);
  }
  return out;
}

}  // namespace

TEST_CASE("fit_least_squares closed-form cases") {
  const Matrix a = random_matrix(20, 5, 1);
  const auto ident = fit_least_squares(corpus_of(a, a));
  CHECK(naive_max_abs_diff(ident.matrix(), Matrix::identity(5)) <= 1e-12);
  CHECK(ident.method() == FitMethod::least_squares);
  CHECK(ident.diagnostics().solver == "pinv");

  const Matrix small{{1, 0}, {0, 1}, {1, 1}};
  const Matrix truth{{1, 2}, {3, 4}};
  const auto fitted = fit_least_squares(corpus_of(small, naive_multiply(small, truth)));
  CHECK(naive_max_abs_diff(fitted.matrix(), truth) <= 1e-12);
  CHECK(fitted.diagnostics().residual_frobenius <= 1e-12);
}

TEST_CASE("fit_least_squares on a noisy planted map") {
  SynthSpec spec;
  spec.n = 100;
  spec.d = 8;
  spec.map_kind = MapKind::general;
  spec.noise_sigma = 0.01;
  spec.seed = 5;
  const SynthCorpus s = generate(spec);
  const auto phi = fit_least_squares(s.corpus);
  CHECK(naive_frobenius(subtract(phi.matrix(), s.true_map)) <= 0.1);

  const Matrix& a = s.corpus.source().matrix();
  const Matrix& b = s.corpus.target().matrix();
  const Matrix oracle = eigen_pinv_solution(a, b);
  CHECK(std::abs(phi.diagnostics().residual_frobenius - objective(a, b, oracle)) <= 1e-9);
}

TEST_CASE("fit_least_squares solver selection") {
  const Matrix a = random_matrix(30, 4, 2);
  const Matrix b = random_matrix(30, 4, 3);
  LeastSquaresOptions gram;
  gram.solver = LeastSquaresSolver::gram;
  const auto via_gram = fit_least_squares(corpus_of(a, b), gram);
  CHECK(via_gram.diagnostics().solver == "gram");
  CHECK(naive_frobenius(subtract(via_gram.matrix(), fit_least_squares(corpus_of(a, b)).matrix())) <=
        1e-9);

  LeastSquaresOptions bad;
  bad.ridge = 1.0;
  CHECK_THROWS_AS(fit_least_squares(corpus_of(a, b), bad), ParameterError);

  gram.ridge = 2.0;
  const auto ridged = fit_least_squares(corpus_of(a, b), gram);
  CHECK(ridged.diagnostics().ridge == 2.0);
  CHECK(naive_frobenius(ridged.matrix()) < naive_frobenius(via_gram.matrix()));
}

TEST_CASE("fit_least_squares with fewer pairs than dimensions returns the minimum-norm map") {
  const Matrix a = random_matrix(5, 12, 6);
  const Matrix b = random_matrix(5, 12, 7);
  const auto phi = fit_least_squares(corpus_of(a, b));
  CHECK(naive_max_abs_diff(phi.matrix(), eigen_pinv_solution(a, b)) <= 1e-10);
  CHECK(phi.diagnostics().residual_frobenius <= 1e-10);
  LeastSquaresOptions gram;
  gram.solver = LeastSquaresSolver::gram;
  CHECK_THROWS_AS(fit_least_squares(corpus_of(a, b), gram), NumericalError);
}

TEST_CASE("fit_procrustes recovers a 90 degree rotation") {
  const Matrix rot{{0, -1}, {1, 0}};
  const auto psi = fit_procrustes(corpus_of(Matrix::identity(2), rot));
  CHECK(naive_max_abs_diff(psi.matrix(), rot) <= 1e-15);
  CHECK(psi.method() == FitMethod::procrustes);
}

TEST_CASE("fit_procrustes recovers a planted orthogonal map") {
  const Matrix q = random_orthogonal(16, 42);
  const Matrix a = random_matrix(200, 16, 43);
  const auto psi = fit_procrustes(corpus_of(a, naive_multiply(a, q)));
  CHECK(naive_max_abs_diff(psi.matrix(), q) <= 1e-6);
}

TEST_CASE("fit_procrustes beats a dense sweep of the 2x2 orthogonal group") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Matrix a = random_matrix(3, 2, 300 + seed);
    const Matrix b = random_matrix(3, 2, 400 + seed);
    const auto psi = fit_procrustes(corpus_of(a, b));
    CHECK(objective(a, b, psi.matrix()) <= sweep_orthogonal_2x2(a, b, 0.001));
  }
}

TEST_CASE("procrustes output is orthogonal and never beats least squares") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const std::size_t n = 3 + seed * 7;
    const std::size_t d = 2 + seed % 9;
    const Matrix a = random_matrix(n, d, 600 + seed, -2.0, 2.0);
    const Matrix b = random_matrix(n, d, 700 + seed, -2.0, 2.0);
    const auto corpus = corpus_of(a, b);
    const auto psi = fit_procrustes(corpus);
    const auto phi = fit_least_squares(corpus);
    CHECK(naive_max_abs_diff(naive_multiply(psi.matrix().transposed(), psi.matrix()),
                             Matrix::identity(d)) <= 1e-8);
    CHECK(psi.diagnostics().residual_frobenius >= phi.diagnostics().residual_frobenius - 1e-9);
  }
}

TEST_CASE("exact recovery when the target is a linear image of the source") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Matrix a = random_matrix(60, 6, 800 + seed);
    const Matrix m = random_matrix(6, 6, 900 + seed, -3.0, 3.0);
    CHECK(naive_frobenius(subtract(fit_least_squares(corpus_of(a, naive_multiply(a, m))).matrix(),
                                   m)) <= 1e-8);
    const Matrix q = random_orthogonal(6, 1000 + seed);
    CHECK(naive_max_abs_diff(fit_procrustes(corpus_of(a, naive_multiply(a, q))).matrix(), q) <=
          1e-6);
  }
}

TEST_CASE("ProjectionMatrix rejects a non-orthogonal procrustes map") {
  CHECK_THROWS_AS(ProjectionMatrix(Matrix{{1, 1}, {0, 1}}, FitMethod::procrustes), DataError);
  CHECK_THROWS_AS(ProjectionMatrix(Matrix(2, 3), FitMethod::least_squares), DataError);
  CHECK_NOTHROW(ProjectionMatrix(Matrix{{1, 1}, {0, 1}}, FitMethod::least_squares));
}

TEST_CASE("sgd_gradient") {
  const Matrix a = random_matrix(10, 4, 50);
  const Matrix b = random_matrix(10, 1, 51);
  const EmbeddingMatrix s_a(a);
  std::vector<double> b_col(b.values().begin(), b.values().end());

  SUBCASE("vanishes at the least-squares optimum") {
    const Matrix w = pinv_solve(a, b);
    const auto g = sgd_gradient(w.values(), s_a, b_col);
    for (double v : g) CHECK(std::abs(v) <= 1e-8);
  }
  SUBCASE("matches central finite differences") {
    const auto loss = [&](const std::vector<double>& w) {
      double acc = 0.0;
      for (std::size_t i = 0; i < 10; ++i) {
        double r = -b_col[i];
        for (std::size_t k = 0; k < 4; ++k) r += a(i, k) * w[k];
        acc += r * r;
      }
      return acc / 20.0;
    };
    const std::vector<double> w{0.3, -1.2, 0.8, 2.0};
    const auto g = sgd_gradient(w, s_a, b_col);
    const double h = 1e-5;
    for (std::size_t k = 0; k < 4; ++k) {
      auto up = w;
      auto down = w;
      up[k] += h;
      down[k] -= h;
      CHECK(std::abs(g[k] - (loss(up) - loss(down)) / (2 * h)) <= 1e-5);
    }
  }
  SUBCASE("zero design gives zero gradient") {
    const auto g = sgd_gradient(std::vector<double>{1, 2, 3}, EmbeddingMatrix(Matrix(5, 3)),
                                std::vector<double>{1, 2, 3, 4, 5});
    CHECK(g == std::vector<double>{0, 0, 0});
  }
  SUBCASE("shape mismatch") {
    CHECK_THROWS_AS(sgd_gradient(std::vector<double>{1, 2}, s_a, b_col), DataError);
    CHECK_THROWS_AS(sgd_gradient(std::vector<double>{1, 2, 3, 4}, s_a, std::vector<double>{1}),
                    DataError);
  }
}

TEST_CASE("fit_sgd converges on an identity target with orthonormal rows") {
  const Matrix a = random_orthogonal(8, 3);
  SgdConfig cfg;
  cfg.learning_rate = 2.0;
  cfg.batch_size = 8;
  const auto w = fit_sgd(corpus_of(a, a), cfg);
  CHECK(w.diagnostics().objective < cfg.tol);
  CHECK(w.diagnostics().iterations < cfg.epochs);
  CHECK(w.method() == FitMethod::sgd);
}

TEST_CASE("fit_sgd lands on the least-squares map") {
  SynthSpec spec;
  spec.n = 200;
  spec.d = 8;
  spec.map_kind = MapKind::general;
  spec.seed = 9;
  const SynthCorpus s = generate(spec);
  SgdConfig cfg;
  cfg.tol = 1e-12;
  const auto w = fit_sgd(s.corpus, cfg);
  const auto phi = fit_least_squares(s.corpus);
  CHECK(naive_frobenius(subtract(w.matrix(), phi.matrix())) <= 1e-3);
}

TEST_CASE("fit_sgd diverges loudly with a huge learning rate") {
  SynthSpec spec;
  spec.n = 200;
  spec.d = 8;
  spec.map_kind = MapKind::general;
  spec.seed = 9;
  SgdConfig cfg;
  cfg.learning_rate = 10.0;
  CHECK_THROWS_WITH_AS(fit_sgd(generate(spec).corpus, cfg), "sgd diverged; reduce learning_rate",
                       NumericalError);
}

TEST_CASE("fit_sgd is deterministic per seed and validates its config") {
  const Matrix a = random_matrix(50, 4, 60);
  const Matrix b = random_matrix(50, 4, 61);
  SgdConfig cfg;
  cfg.epochs = 20;
  cfg.init = SgdInit::gaussian;
  cfg.seed = 17;
  const auto first = fit_sgd(corpus_of(a, b), cfg);
  const auto second = fit_sgd(corpus_of(a, b), cfg);
  CHECK(first.matrix() == second.matrix());
  CHECK(first.diagnostics().seed == 17u);
  cfg.seed = 18;
  CHECK(fit_sgd(corpus_of(a, b), cfg).matrix() != first.matrix());

  SgdConfig bad;
  bad.learning_rate = 0.0;
  CHECK_THROWS_AS(fit_sgd(corpus_of(a, b), bad), ParameterError);
  bad = {};
  bad.batch_size = 0;
  CHECK_THROWS_AS(fit_sgd(corpus_of(a, b), bad), ParameterError);
  bad = {};
  bad.epochs = 0;
  CHECK_THROWS_AS(fit_sgd(corpus_of(a, b), bad), ParameterError);
  bad = {};
  bad.tol = -1.0;
  CHECK_THROWS_AS(fit_sgd(corpus_of(a, b), bad), ParameterError);
}

TEST_CASE("apply_projection") {
  const EmbeddingMatrix m(random_matrix(6, 3, 70));
  const ProjectionMatrix eye(Matrix::identity(3), FitMethod::least_squares);
  CHECK(apply_projection(eye, m).matrix() == m.matrix());

  const ProjectionMatrix rot(random_orthogonal(3, 71), FitMethod::procrustes);
  const EmbeddingMatrix rotated = apply_projection(rot, m);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    double before = 0.0;
    double after = 0.0;
    for (std::size_t j = 0; j < 3; ++j) {
      before += m.matrix()(i, j) * m.matrix()(i, j);
      after += rotated.matrix()(i, j) * rotated.matrix()(i, j);
    }
    CHECK(std::abs(std::sqrt(after) - std::sqrt(before)) <= 1e-10 * std::sqrt(before));
  }

  const ProjectionMatrix general(random_matrix(3, 3, 72), FitMethod::least_squares);
  CHECK(naive_max_abs_diff(apply_projection(general, m).matrix(),
                           naive_multiply(m.matrix(), general.matrix())) <= 1e-14);

  CHECK_THROWS_WITH_AS(apply_projection(ProjectionMatrix(Matrix::identity(4), FitMethod::sgd), m),
                       doctest::Contains("4x4 projection to 6x3"), DataError);
}

TEST_CASE("preprocessing") {
  const EmbeddingMatrix m(Matrix{{1, 3}, {3, 5}});
  CHECK(preprocess(m, {}).matrix() == m.matrix());
  CHECK(preprocess(m, {true, false}).matrix() == Matrix{{-1, -1}, {1, 1}});
  const auto both = preprocess(m, {true, true}).matrix();
  CHECK(both(0, 0) == doctest::Approx(-std::sqrt(0.5)));
  CHECK(parse_fit_method("lsq") == FitMethod::least_squares);
  CHECK_THROWS_AS(parse_fit_method("cca"), ParameterError);
}
