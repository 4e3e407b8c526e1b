#pragma once

#include <cstdint>
#include <vector>

#include "sentalign/matrix.hpp"

namespace sentalign {

/// Thin singular value decomposition a = u * diag(sigma) * vt with
/// k = min(rows, cols). sigma is sorted nonincreasing.
struct SvdResult {
  Matrix u;                   // rows x k, orthonormal columns
  std::vector<double> sigma;  // k values, >= 0
  Matrix vt;                  // k x cols, orthonormal rows
};

/// Thin QR with nonnegative diagonal on r.
struct QrResult {
  Matrix q;  // rows x cols, orthonormal columns
  Matrix r;  // cols x cols, upper triangular
};

inline constexpr double kDefaultRcond = 1e-12;
inline constexpr int kSvdMaxSweeps = 60;

/// One-sided Jacobi SVD. Tall inputs (rows >= 2*cols) are first reduced to
/// their R factor. Throws NumericalError("svd did not converge") when the
/// sweep cap is hit and DataError on empty or non-finite input.
SvdResult svd(const Matrix& a);

/// Householder QR of a matrix with rows >= cols.
QrResult householder_qr(const Matrix& a);

/// Minimum-norm least-squares solution of a * x = b. Singular values below
/// rcond * sigma_max are treated as zero.
Matrix pinv_solve(const Matrix& a, const Matrix& b, double rcond = kDefaultRcond);

/// (aᵀa + ridge*I)⁻¹ aᵀb through a Cholesky factorization of the Gram matrix.
Matrix gram_solve(const Matrix& a, const Matrix& b, double ridge = 0.0);

/// Haar-distributed d x d orthogonal matrix: QR of a seeded Gaussian matrix,
/// with the signs fixed so that R has a positive diagonal.
Matrix random_orthogonal(std::size_t d, std::uint64_t seed);

/// Matrix of i.i.d. N(0, 1) entries, deterministic per seed.
Matrix random_gaussian(std::size_t rows, std::size_t cols, std::uint64_t seed);

}  // namespace sentalign
