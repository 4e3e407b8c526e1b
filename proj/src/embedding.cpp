#include "sentalign/embedding.hpp"

#include <cmath>

#include <fmt/format.h>

#include "sentalign/errors.hpp"
#include "sentalign/simd.hpp"

namespace sentalign {
namespace {

void check_finite(const Matrix& m, const char* what) {
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (!std::isfinite(m(i, j))) {
        throw DataError(fmt::format("{}: non-finite value at ({},{})", what, i, j));
      }
    }
  }
}

}  // namespace

EmbeddingMatrix::EmbeddingMatrix(Matrix values) : values_(std::move(values)) {
  if (values_.rows() == 0 || values_.cols() == 0) {
    throw DataError(fmt::format("embedding matrix must be at least 1x1, got {}x{}",
                                values_.rows(), values_.cols()));
  }
  check_finite(values_, "embedding matrix");
}

TokenEmbeddingMatrix::TokenEmbeddingMatrix(Matrix values) : values_(std::move(values)) {
  if (values_.rows() == 0 || values_.cols() == 0) throw DataError("empty input");
  if (values_.rows() > kMaxTokens) {
    throw DataError(
        fmt::format("token matrix has {} rows, at most {} allowed", values_.rows(), kMaxTokens));
  }
  check_finite(values_, "token matrix");
}

ParallelCorpus::ParallelCorpus(EmbeddingMatrix source, EmbeddingMatrix target,
                               std::string source_lang, std::string target_lang)
    : source_(std::move(source)),
      target_(std::move(target)),
      source_lang_(std::move(source_lang)),
      target_lang_(std::move(target_lang)) {
  if (source_.rows() != target_.rows()) {
    throw DataError(fmt::format("parallel corpus row mismatch: source has {} rows, target has {}",
                                source_.rows(), target_.rows()));
  }
  if (source_.cols() != target_.cols()) {
    throw DataError(fmt::format("parallel corpus dim mismatch: source d={}, target d={}",
                                source_.cols(), target_.cols()));
  }
}

std::vector<double> mean_pool(const Matrix& tokens) {
  if (tokens.rows() == 0 || tokens.cols() == 0) throw DataError("empty input");
  check_finite(tokens, "mean_pool");
  std::vector<double> acc(tokens.cols(), 0.0);
  for (std::size_t i = 0; i < tokens.rows(); ++i) simd::axpy(1.0, tokens.row(i), acc);
  const double t = static_cast<double>(tokens.rows());
  for (double& v : acc) v /= t;
  return acc;
}

std::vector<double> mean_pool(const TokenEmbeddingMatrix& tokens) {
  return mean_pool(tokens.matrix());
}

EmbeddingMatrix stack_pooled(std::span<const TokenEmbeddingMatrix> token_matrices) {
  if (token_matrices.empty()) throw DataError("stack_pooled: empty input sequence");
  const std::size_t d = token_matrices.front().cols();
  Matrix out(token_matrices.size(), d);
  for (std::size_t i = 0; i < token_matrices.size(); ++i) {
    if (token_matrices[i].cols() != d) {
      throw DataError(fmt::format("stack_pooled: input {} has dimension {}, expected {}", i,
                                  token_matrices[i].cols(), d));
    }
    const auto pooled = mean_pool(token_matrices[i]);
    std::copy(pooled.begin(), pooled.end(), out.row(i).begin());
  }
  return EmbeddingMatrix(std::move(out));
}

EmbeddingMatrix center_columns(const EmbeddingMatrix& m) {
  const auto means = mean_pool(m.matrix());
  Matrix out = m.matrix();
  for (std::size_t i = 0; i < out.rows(); ++i) simd::axpy(-1.0, means, out.row(i));
  return EmbeddingMatrix(std::move(out));
}

EmbeddingMatrix normalize_rows(const EmbeddingMatrix& m) {
  Matrix out = m.matrix();
  for (std::size_t i = 0; i < out.rows(); ++i) {
    auto r = out.row(i);
    const double norm = std::sqrt(simd::dot(r, r));
    if (norm == 0.0) throw DataError(fmt::format("cannot normalize zero row {}", i));
    for (double& v : r) v /= norm;
  }
  return EmbeddingMatrix(std::move(out));
}

}  // namespace sentalign
