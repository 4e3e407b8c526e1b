#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sentalign/embedding.hpp"
#include "sentalign/linalg.hpp"
#include "sentalign/matrix.hpp"

namespace sentalign {

enum class FitMethod { least_squares, procrustes, sgd };

std::string_view to_string(FitMethod m) noexcept;
FitMethod parse_fit_method(std::string_view name);

/// Row preprocessing applied to both sides of a corpus before fitting.
/// Centering runs before row normalization.
struct Preprocessing {
  bool center = false;
  bool unit_norm = false;

  friend bool operator==(const Preprocessing&, const Preprocessing&) = default;
};

/// What a fit produced besides the matrix itself.
struct FitDiagnostics {
  double objective = 0.0;           // residual norm for closed forms, final MSE for sgd
  double residual_frobenius = 0.0;  // ||S_A P - S_B||_F on the fitted (preprocessed) corpus
  std::size_t iterations = 0;       // sgd epochs; 0 for closed forms
  double ridge = 0.0;
  std::optional<std::uint64_t> seed;
  std::string solver;  // "pinv", "gram", "svd", "sgd"
  Preprocessing preprocessing;
};

/// A fitted d x d cross-lingual map, applied as rows * matrix.
class ProjectionMatrix {
 public:
  static constexpr double kOrthogonalityTol = 1e-8;

  ProjectionMatrix(Matrix values, FitMethod method, FitDiagnostics diagnostics = {});

  std::size_t dim() const noexcept { return values_.rows(); }
  const Matrix& matrix() const noexcept { return values_; }
  FitMethod method() const noexcept { return method_; }
  const FitDiagnostics& diagnostics() const noexcept { return diagnostics_; }

 private:
  Matrix values_;
  FitMethod method_;
  FitDiagnostics diagnostics_;
};

enum class LeastSquaresSolver { pinv, gram };

struct LeastSquaresOptions {
  LeastSquaresSolver solver = LeastSquaresSolver::pinv;
  double ridge = 0.0;  // only honoured by the gram solver
  double rcond = kDefaultRcond;
};

enum class SgdInit { zeros, gaussian };

struct SgdConfig {
  double learning_rate = 0.05;
  std::size_t epochs = 500;
  std::size_t batch_size = 32;
  double tol = 1e-6;  // stop once the full-corpus MSE falls below this
  std::uint64_t seed = 0;
  SgdInit init = SgdInit::zeros;
  double init_sigma = 0.01;

  /// Throws ParameterError when a field is out of range.
  void validate() const;
};

/// Unconstrained least-squares map minimizing ||S_A P - S_B||_F.
ProjectionMatrix fit_least_squares(const ParallelCorpus& corpus,
                                   const LeastSquaresOptions& options = {});

/// Orthogonal map U Vᵀ from the SVD of the d x d cross-covariance S_Aᵀ S_B.
ProjectionMatrix fit_procrustes(const ParallelCorpus& corpus);

/// Linear single-layer net trained by shuffled mini-batch SGD on
/// L(W) = (1/2n) ||S_A W - S_B||_F^2. Throws NumericalError when the loss
/// stops being finite.
ProjectionMatrix fit_sgd(const ParallelCorpus& corpus, const SgdConfig& config = {});

/// Gradient of the single-column loss (1/2n)||S_A w - b||^2 with respect to w.
std::vector<double> sgd_gradient(std::span<const double> w_col, const EmbeddingMatrix& s_a,
                                 std::span<const double> b_col);

/// (1/2n) ||S_A W - S_B||_F^2
double mse_loss(const ParallelCorpus& corpus, const Matrix& w);

/// ||S_A P - S_B||_F
double residual_frobenius(const ParallelCorpus& corpus, const Matrix& p);

/// m * proj; m.cols must equal proj.dim.
EmbeddingMatrix apply_projection(const ProjectionMatrix& proj, const EmbeddingMatrix& m);

EmbeddingMatrix preprocess(const EmbeddingMatrix& m, const Preprocessing& pre);
ParallelCorpus preprocess(const ParallelCorpus& corpus, const Preprocessing& pre);

}  // namespace sentalign
