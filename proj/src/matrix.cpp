#include "sentalign/matrix.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "sentalign/errors.hpp"
#include "sentalign/simd.hpp"

namespace sentalign {

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), values_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  if (values_.size() != rows * cols) {
    throw DataError(fmt::format("matrix payload has {} values, expected {}x{}", values_.size(),
                                rows, cols));
  }
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows)
    : rows_(rows.size()), cols_(rows.size() == 0 ? 0 : rows.begin()->size()) {
  values_.reserve(rows_ * cols_);
  std::size_t r = 0;
  for (const auto& row : rows) {
    if (row.size() != cols_) {
      throw DataError(fmt::format("ragged initializer: row {} has {} values, expected {}", r,
                                  row.size(), cols_));
    }
    values_.insert(values_.end(), row.begin(), row.end());
    ++r;
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::transposed() const {
  Matrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  }
  return t;
}

Matrix multiply(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw DataError(fmt::format("cannot multiply {}x{} by {}x{}", a.rows(), a.cols(), b.rows(),
                                b.cols()));
  }
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto dst = out.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik != 0.0) simd::axpy(aik, b.row(k), dst);
    }
  }
  return out;
}

Matrix multiply_at_b(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) {
    throw DataError(fmt::format("cannot form A^T B with A {}x{} and B {}x{}", a.rows(), a.cols(),
                                b.rows(), b.cols()));
  }
  Matrix out(a.cols(), b.cols());
  for (std::size_t k = 0; k < a.rows(); ++k) {
    const auto brow = b.row(k);
    for (std::size_t i = 0; i < a.cols(); ++i) {
      const double aki = a(k, i);
      if (aki != 0.0) simd::axpy(aki, brow, out.row(i));
    }
  }
  return out;
}

Matrix multiply_a_bt(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) {
    throw DataError(fmt::format("cannot form A B^T with A {}x{} and B {}x{}", a.rows(), a.cols(),
                                b.rows(), b.cols()));
  }
  Matrix out(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < b.rows(); ++j) out(i, j) = simd::dot(a.row(i), b.row(j));
  }
  return out;
}

Matrix subtract(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DataError(fmt::format("cannot subtract {}x{} and {}x{}", a.rows(), a.cols(), b.rows(),
                                b.cols()));
  }
  Matrix out = a;
  simd::axpy(-1.0, b.values(), out.values());
  return out;
}

double frobenius_norm(const Matrix& m) {
  // Scaled accumulation so huge or tiny entries do not overflow/underflow.
  const double scale = max_abs(m);
  if (scale == 0.0 || !std::isfinite(scale)) return scale;
  double acc = 0.0;
  for (double v : m.values()) {
    const double s = v / scale;
    acc += s * s;
  }
  return scale * std::sqrt(acc);
}

double max_abs(const Matrix& m) {
  double best = 0.0;
  for (double v : m.values()) best = std::max(best, std::abs(v));
  return best;
}

double frobenius_distance(const Matrix& a, const Matrix& b) { return frobenius_norm(subtract(a, b)); }

double max_abs_difference(const Matrix& a, const Matrix& b) { return max_abs(subtract(a, b)); }

bool all_finite(const Matrix& m) noexcept {
  return std::all_of(m.values().begin(), m.values().end(),
                     [](double v) { return std::isfinite(v); });
}

}  // namespace sentalign
