#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "sentalign/matrix.hpp"

namespace sentalign {

/// n x d matrix of sentence embeddings, one sentence per row.
/// Invariants: n >= 1, d >= 1, every value finite.
class EmbeddingMatrix {
 public:
  explicit EmbeddingMatrix(Matrix values);

  std::size_t rows() const noexcept { return values_.rows(); }
  std::size_t cols() const noexcept { return values_.cols(); }
  std::span<const double> row(std::size_t i) const noexcept { return values_.row(i); }
  const Matrix& matrix() const noexcept { return values_; }

  friend bool operator==(const EmbeddingMatrix&, const EmbeddingMatrix&) = default;

 private:
  Matrix values_;
};

inline constexpr std::size_t kMaxTokens = 512;

/// Token-level encoder output for a single sentence: t x d with 1 <= t <= 512.
class TokenEmbeddingMatrix {
 public:
  explicit TokenEmbeddingMatrix(Matrix values);

  std::size_t tokens() const noexcept { return values_.rows(); }
  std::size_t cols() const noexcept { return values_.cols(); }
  const Matrix& matrix() const noexcept { return values_; }

 private:
  Matrix values_;
};

/// Row-aligned translated pairs: source row i translates to target row i.
class ParallelCorpus {
 public:
  ParallelCorpus(EmbeddingMatrix source, EmbeddingMatrix target, std::string source_lang = "src",
                 std::string target_lang = "tgt");

  const EmbeddingMatrix& source() const noexcept { return source_; }
  const EmbeddingMatrix& target() const noexcept { return target_; }
  const std::string& source_lang() const noexcept { return source_lang_; }
  const std::string& target_lang() const noexcept { return target_lang_; }
  std::size_t pairs() const noexcept { return source_.rows(); }
  std::size_t dim() const noexcept { return source_.cols(); }

 private:
  EmbeddingMatrix source_;
  EmbeddingMatrix target_;
  std::string source_lang_;
  std::string target_lang_;
};

/// Column-wise average of the token rows.
std::vector<double> mean_pool(const TokenEmbeddingMatrix& tokens);

/// Same check mean_pool applies, on an unvalidated matrix: errors with
/// "empty input" or "non-finite value at (i,j)".
std::vector<double> mean_pool(const Matrix& tokens);

/// One pooled row per token matrix. All inputs must share the same width.
EmbeddingMatrix stack_pooled(std::span<const TokenEmbeddingMatrix> token_matrices);

/// Subtracts the column means from every row.
EmbeddingMatrix center_columns(const EmbeddingMatrix& m);

/// Scales every row to unit Euclidean norm. Zero rows are an error.
EmbeddingMatrix normalize_rows(const EmbeddingMatrix& m);

}  // namespace sentalign
