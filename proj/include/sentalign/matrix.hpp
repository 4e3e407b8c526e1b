#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace sentalign {

/// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> values);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }

  double& operator()(std::size_t r, std::size_t c) noexcept { return values_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const noexcept { return values_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) noexcept { return {values_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const noexcept {
    return {values_.data() + r * cols_, cols_};
  }

  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }

  Matrix transposed() const;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

/// a * b
Matrix multiply(const Matrix& a, const Matrix& b);

/// aᵀ * b without materializing the transpose.
Matrix multiply_at_b(const Matrix& a, const Matrix& b);

/// a * bᵀ
Matrix multiply_a_bt(const Matrix& a, const Matrix& b);

Matrix subtract(const Matrix& a, const Matrix& b);

double frobenius_norm(const Matrix& m);
double max_abs(const Matrix& m);

/// Frobenius norm of a - b.
double frobenius_distance(const Matrix& a, const Matrix& b);

/// max |a - b| over all entries.
double max_abs_difference(const Matrix& a, const Matrix& b);

bool all_finite(const Matrix& m) noexcept;

}  // namespace sentalign
