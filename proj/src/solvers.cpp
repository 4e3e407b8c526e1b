#include "sentalign/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include <fmt/format.h>

#include "sentalign/errors.hpp"
#include "sentalign/simd.hpp"

namespace sentalign {

std::string_view to_string(FitMethod m) noexcept {
  switch (m) {
    case FitMethod::least_squares:
      return "least_squares";
    case FitMethod::procrustes:
      return "procrustes";
    case FitMethod::sgd:
      return "sgd";
  }
  return "unknown";
}

FitMethod parse_fit_method(std::string_view name) {
  if (name == "least_squares" || name == "lsq") return FitMethod::least_squares;
  if (name == "procrustes") return FitMethod::procrustes;
  if (name == "sgd") return FitMethod::sgd;
  throw ParameterError(fmt::format("unknown fit method '{}'", name));
}

ProjectionMatrix::ProjectionMatrix(Matrix values, FitMethod method, FitDiagnostics diagnostics)
    : values_(std::move(values)), method_(method), diagnostics_(std::move(diagnostics)) {
  if (values_.rows() == 0 || values_.rows() != values_.cols()) {
    throw DataError(fmt::format("projection must be square and non-empty, got {}x{}",
                                values_.rows(), values_.cols()));
  }
  if (!all_finite(values_)) throw DataError("projection has non-finite entries");
  if (method_ == FitMethod::procrustes) {
    const double err =
        max_abs_difference(multiply_at_b(values_, values_), Matrix::identity(values_.rows()));
    if (err > kOrthogonalityTol) {
      throw DataError(fmt::format("procrustes projection is not orthogonal (max |PᵀP - I| = {:g})",
                                  err));
    }
  }
}

void SgdConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw ParameterError(fmt::format("learning_rate must be > 0, got {}", learning_rate));
  }
  if (epochs < 1) throw ParameterError("epochs must be >= 1");
  if (batch_size < 1) throw ParameterError("batch_size must be >= 1");
  if (!(tol >= 0.0)) throw ParameterError(fmt::format("tol must be >= 0, got {}", tol));
  if (init == SgdInit::gaussian && !(init_sigma >= 0.0)) {
    throw ParameterError(fmt::format("init sigma must be >= 0, got {}", init_sigma));
  }
}

double residual_frobenius(const ParallelCorpus& corpus, const Matrix& p) {
  return frobenius_distance(multiply(corpus.source().matrix(), p), corpus.target().matrix());
}

double mse_loss(const ParallelCorpus& corpus, const Matrix& w) {
  const double r = residual_frobenius(corpus, w);
  return r * r / (2.0 * static_cast<double>(corpus.pairs()));
}

ProjectionMatrix fit_least_squares(const ParallelCorpus& corpus,
                                   const LeastSquaresOptions& options) {
  const Matrix& a = corpus.source().matrix();
  const Matrix& b = corpus.target().matrix();
  FitDiagnostics diag;
  diag.ridge = options.ridge;
  Matrix phi;
  switch (options.solver) {
    case LeastSquaresSolver::pinv:
      if (options.ridge != 0.0) {
        throw ParameterError("ridge regularization requires the gram solver");
      }
      phi = pinv_solve(a, b, options.rcond);
      diag.solver = "pinv";
      break;
    case LeastSquaresSolver::gram:
      phi = gram_solve(a, b, options.ridge);
      diag.solver = "gram";
      break;
  }
  diag.residual_frobenius = residual_frobenius(corpus, phi);
  diag.objective = diag.residual_frobenius;
  return ProjectionMatrix(std::move(phi), FitMethod::least_squares, std::move(diag));
}

ProjectionMatrix fit_procrustes(const ParallelCorpus& corpus) {
  const Matrix cross = multiply_at_b(corpus.source().matrix(), corpus.target().matrix());
  const SvdResult s = svd(cross);
  Matrix psi = multiply(s.u, s.vt);
  FitDiagnostics diag;
  diag.solver = "svd";
  diag.residual_frobenius = residual_frobenius(corpus, psi);
  diag.objective = diag.residual_frobenius;
  return ProjectionMatrix(std::move(psi), FitMethod::procrustes, std::move(diag));
}

ProjectionMatrix fit_sgd(const ParallelCorpus& corpus, const SgdConfig& config) {
  config.validate();
  const Matrix& x = corpus.source().matrix();
  const Matrix& y = corpus.target().matrix();
  const std::size_t n = corpus.pairs();
  const std::size_t d = corpus.dim();

  std::mt19937_64 rng(config.seed);
  Matrix w(d, d);
  if (config.init == SgdInit::gaussian) {
    std::normal_distribution<double> normal(0.0, config.init_sigma);
    for (double& v : w.values()) v = normal(rng);
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Matrix grad(d, d);
  std::vector<double> residual(d);

  double loss = mse_loss(corpus, w);
  std::size_t epoch = 0;
  while (epoch < config.epochs) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < n; start += config.batch_size) {
      const std::size_t stop = std::min(n, start + config.batch_size);
      std::fill(grad.values().begin(), grad.values().end(), 0.0);
      for (std::size_t b = start; b < stop; ++b) {
        const auto xi = x.row(order[b]);
        const auto yi = y.row(order[b]);
        std::transform(yi.begin(), yi.end(), residual.begin(), [](double v) { return -v; });
        for (std::size_t k = 0; k < d; ++k) simd::axpy(xi[k], w.row(k), residual);
        for (std::size_t k = 0; k < d; ++k) simd::axpy(xi[k], residual, grad.row(k));
      }
      simd::axpy(-config.learning_rate / static_cast<double>(stop - start), grad.values(),
                 w.values());
    }
    ++epoch;
    loss = all_finite(w) ? mse_loss(corpus, w) : std::numeric_limits<double>::infinity();
    if (!std::isfinite(loss)) throw NumericalError("sgd diverged; reduce learning_rate");
    if (loss < config.tol) break;
  }

  FitDiagnostics diag;
  diag.solver = "sgd";
  diag.objective = loss;
  diag.iterations = epoch;
  diag.seed = config.seed;
  diag.residual_frobenius = residual_frobenius(corpus, w);
  return ProjectionMatrix(std::move(w), FitMethod::sgd, std::move(diag));
}

std::vector<double> sgd_gradient(std::span<const double> w_col, const EmbeddingMatrix& s_a,
                                 std::span<const double> b_col) {
  if (w_col.size() != s_a.cols() || b_col.size() != s_a.rows()) {
    throw DataError(fmt::format("sgd_gradient: S_A is {}x{}, w has {} entries, b has {}",
                                s_a.rows(), s_a.cols(), w_col.size(), b_col.size()));
  }
  std::vector<double> grad(s_a.cols(), 0.0);
  for (std::size_t i = 0; i < s_a.rows(); ++i) {
    const double r = simd::dot(s_a.row(i), w_col) - b_col[i];
    simd::axpy(r, s_a.row(i), grad);
  }
  const double n = static_cast<double>(s_a.rows());
  for (double& g : grad) g /= n;
  return grad;
}

EmbeddingMatrix apply_projection(const ProjectionMatrix& proj, const EmbeddingMatrix& m) {
  if (m.cols() != proj.dim()) {
    throw DataError(fmt::format("cannot apply {}x{} projection to {}x{} embeddings", proj.dim(),
                                proj.dim(), m.rows(), m.cols()));
  }
  return EmbeddingMatrix(multiply(m.matrix(), proj.matrix()));
}

EmbeddingMatrix preprocess(const EmbeddingMatrix& m, const Preprocessing& pre) {
  EmbeddingMatrix out = pre.center ? center_columns(m) : m;
  return pre.unit_norm ? normalize_rows(out) : out;
}

ParallelCorpus preprocess(const ParallelCorpus& corpus, const Preprocessing& pre) {
  return ParallelCorpus(preprocess(corpus.source(), pre), preprocess(corpus.target(), pre),
                        corpus.source_lang(), corpus.target_lang());
}

}  // namespace sentalign
