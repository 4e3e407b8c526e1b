#include "sentalign/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include <fmt/format.h>

#include "sentalign/errors.hpp"
#include "sentalign/simd.hpp"

namespace sentalign {
namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

void require_usable(const Matrix& a, const char* what) {
  if (a.rows() == 0 || a.cols() == 0) throw DataError(fmt::format("{}: empty matrix", what));
  if (!all_finite(a)) throw DataError(fmt::format("{}: non-finite input", what));
}

// Jacobi SVD of a matrix with rows >= cols. Works on the transpose so every
// column of the input is a contiguous row and the pair rotations vectorize.
SvdResult jacobi_svd(const Matrix& a) {
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  Matrix cols = a.transposed();   // n x m, row j = column j of a
  Matrix vcols = Matrix::identity(n);  // row j = column j of v

  const double tol = kEps * static_cast<double>(std::max<std::size_t>(m, 8));
  bool converged = n == 1;
  for (int sweep = 0; sweep < kSvdMaxSweeps && !converged; ++sweep) {
    converged = true;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        auto cp = cols.row(p);
        auto cq = cols.row(q);
        const double alpha = simd::dot(cp, cp);
        const double beta = simd::dot(cq, cq);
        const double gamma = simd::dot(cp, cq);
        if (alpha == 0.0 || beta == 0.0) continue;
        if (std::abs(gamma) <= tol * std::sqrt(alpha) * std::sqrt(beta)) continue;
        converged = false;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::hypot(1.0, zeta));
        const double c = 1.0 / std::hypot(1.0, t);
        const double s = c * t;
        simd::rotate(cp, cq, c, s);
        simd::rotate(vcols.row(p), vcols.row(q), c, s);
      }
    }
  }
  if (!converged) throw NumericalError("svd did not converge");

  std::vector<double> norms(n);
  for (std::size_t j = 0; j < n; ++j) norms[j] = std::sqrt(simd::dot(cols.row(j), cols.row(j)));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t l, std::size_t r) { return norms[l] > norms[r]; });

  SvdResult out{Matrix(n, m), std::vector<double>(n), Matrix(n, n)};
  // u is assembled transposed (row j = left singular vector j) then flipped.
  Matrix& ut = out.u;
  std::vector<bool> filled(n, false);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t j = order[k];
    out.sigma[k] = norms[j];
    std::copy(vcols.row(j).begin(), vcols.row(j).end(), out.vt.row(k).begin());
    if (norms[j] > 0.0) {
      auto dst = ut.row(k);
      std::copy(cols.row(j).begin(), cols.row(j).end(), dst.begin());
      for (double& v : dst) v /= norms[j];
      filled[k] = true;
    }
  }

  // Zero singular values leave their left vectors undetermined; complete
  // them to an orthonormal set from the standard basis.
  std::size_t basis = 0;
  for (std::size_t k = 0; k < n; ++k) {
    if (filled[k]) continue;
    auto dst = ut.row(k);
    for (; basis < m; ++basis) {
      std::fill(dst.begin(), dst.end(), 0.0);
      dst[basis] = 1.0;
      for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t o = 0; o < n; ++o) {
          if (o == k || !filled[o]) continue;
          simd::axpy(-simd::dot(ut.row(o), dst), ut.row(o), dst);
        }
      }
      const double norm = std::sqrt(simd::dot(dst, dst));
      if (norm > 0.5) {
        for (double& v : dst) v /= norm;
        filled[k] = true;
        ++basis;
        break;
      }
    }
  }
  out.u = ut.transposed();
  return out;
}

}  // namespace

QrResult householder_qr(const Matrix& a) {
  require_usable(a, "qr");
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  if (m < n) throw DataError(fmt::format("qr needs rows >= cols, got {}x{}", m, n));

  Matrix cols = a.transposed();  // row j = column j of a
  Matrix reflectors(n, m);       // row k holds v_k in entries [k, m)
  std::vector<double> betas(n, 0.0);

  for (std::size_t k = 0; k < n; ++k) {
    auto x = cols.row(k).subspan(k);
    const double norm = std::sqrt(simd::dot(x, x));
    if (norm == 0.0) continue;
    const double alpha = -std::copysign(norm, x[0]);
    auto v = reflectors.row(k).subspan(k);
    std::copy(x.begin(), x.end(), v.begin());
    v[0] -= alpha;
    const double vv = simd::dot(v, v);
    betas[k] = 2.0 / vv;
    x[0] = alpha;
    std::fill(x.begin() + 1, x.end(), 0.0);
    for (std::size_t j = k + 1; j < n; ++j) {
      auto cj = cols.row(j).subspan(k);
      simd::axpy(-betas[k] * simd::dot(v, cj), v, cj);
    }
  }

  QrResult out{Matrix(n, m), Matrix(n, n)};
  Matrix& qt = out.q;  // row j = column j of q
  for (std::size_t j = 0; j < n; ++j) {
    qt(j, j) = 1.0;
    for (std::size_t i = 0; i <= j; ++i) out.r(i, j) = cols(j, i);
  }
  for (std::size_t k = n; k-- > 0;) {
    if (betas[k] == 0.0) continue;
    auto v = reflectors.row(k).subspan(k);
    for (std::size_t j = 0; j < n; ++j) {
      auto qj = qt.row(j).subspan(k);
      simd::axpy(-betas[k] * simd::dot(v, qj), v, qj);
    }
  }
  for (std::size_t k = 0; k < n; ++k) {
    if (out.r(k, k) >= 0.0) continue;
    for (double& v : out.r.row(k)) v = -v;
    for (double& v : qt.row(k)) v = -v;
  }
  out.q = qt.transposed();
  return out;
}

SvdResult svd(const Matrix& a) {
  require_usable(a, "svd");
  if (a.rows() < a.cols()) {
    SvdResult t = svd(a.transposed());
    return {t.vt.transposed(), std::move(t.sigma), t.u.transposed()};
  }
  if (a.rows() >= 2 * a.cols()) {
    QrResult qr = householder_qr(a);
    SvdResult inner = jacobi_svd(qr.r);
    return {multiply(qr.q, inner.u), std::move(inner.sigma), std::move(inner.vt)};
  }
  return jacobi_svd(a);
}

Matrix pinv_solve(const Matrix& a, const Matrix& b, double rcond) {
  if (!(rcond >= 0.0)) throw ParameterError(fmt::format("rcond must be >= 0, got {}", rcond));
  if (a.rows() != b.rows()) {
    throw DataError(fmt::format("pinv_solve: a has {} rows but b has {}", a.rows(), b.rows()));
  }
  const SvdResult s = svd(a);
  Matrix coeffs = multiply_at_b(s.u, b);  // k x b.cols
  const double cutoff = rcond * (s.sigma.empty() ? 0.0 : s.sigma.front());
  for (std::size_t i = 0; i < s.sigma.size(); ++i) {
    const double inv = (s.sigma[i] > cutoff && s.sigma[i] > 0.0) ? 1.0 / s.sigma[i] : 0.0;
    for (double& v : coeffs.row(i)) v *= inv;
  }
  return multiply_at_b(s.vt, coeffs);
}

Matrix gram_solve(const Matrix& a, const Matrix& b, double ridge) {
  if (!(ridge >= 0.0)) throw ParameterError(fmt::format("ridge must be >= 0, got {}", ridge));
  if (a.rows() != b.rows()) {
    throw DataError(fmt::format("gram_solve: a has {} rows but b has {}", a.rows(), b.rows()));
  }
  require_usable(a, "gram_solve");
  const std::size_t d = a.cols();
  Matrix gram = multiply_at_b(a, a);
  double max_diag = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    gram(i, i) += ridge;
    max_diag = std::max(max_diag, gram(i, i));
  }

  // Lower Cholesky factor, stored in place.
  const double pivot_floor = kEps * static_cast<double>(d) * max_diag;
  for (std::size_t j = 0; j < d; ++j) {
    const auto lj = gram.row(j).first(j);
    const double pivot = gram(j, j) - simd::dot(lj, lj);
    if (!(pivot > pivot_floor)) {
      throw NumericalError("gram matrix singular; supply ridge or use pinv");
    }
    const double ljj = std::sqrt(pivot);
    gram(j, j) = ljj;
    for (std::size_t i = j + 1; i < d; ++i) {
      gram(i, j) = (gram(i, j) - simd::dot(gram.row(i).first(j), lj)) / ljj;
    }
  }

  Matrix x = multiply_at_b(a, b);
  // L y = rhs
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t k = 0; k < i; ++k) simd::axpy(-gram(i, k), x.row(k), x.row(i));
    for (double& v : x.row(i)) v /= gram(i, i);
  }
  // Lᵀ x = y
  for (std::size_t i = d; i-- > 0;) {
    for (std::size_t k = i + 1; k < d; ++k) simd::axpy(-gram(k, i), x.row(k), x.row(i));
    for (double& v : x.row(i)) v /= gram(i, i);
  }
  return x;
}

Matrix random_gaussian(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix m(rows, cols);
  for (double& v : m.values()) v = normal(rng);
  return m;
}

Matrix random_orthogonal(std::size_t d, std::uint64_t seed) {
  if (d == 0) throw ParameterError("random_orthogonal: dimension must be >= 1");
  return householder_qr(random_gaussian(d, d, seed)).q;
}

}  // namespace sentalign
