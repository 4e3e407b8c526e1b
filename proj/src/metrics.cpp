#include "sentalign/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "sentalign/errors.hpp"
#include "sentalign/simd.hpp"

namespace sentalign {
namespace {

void check_pair_lengths(std::span<const double> x, std::span<const double> y, const char* what) {
  if (x.size() != y.size()) {
    throw DataError(fmt::format("{}: length mismatch ({} vs {})", what, x.size(), y.size()));
  }
  if (x.size() < 2) throw DataError(fmt::format("{}: need at least 2 values", what));
}

struct PairCosines {
  std::vector<double> values;
  double residual = 0.0;
};

PairCosines pair_cosines(const ParallelCorpus& corpus, const ProjectionMatrix* proj) {
  const EmbeddingMatrix mapped =
      proj != nullptr ? apply_projection(*proj, corpus.source()) : corpus.source();
  PairCosines out;
  out.values.resize(corpus.pairs());
  for (std::size_t i = 0; i < corpus.pairs(); ++i) {
    try {
      out.values[i] = cosine(mapped.row(i), corpus.target().row(i));
    } catch (const DataError& e) {
      throw DataError(fmt::format("pair {}: {}", i, e.what()));
    }
  }
  out.residual = frobenius_distance(mapped.matrix(), corpus.target().matrix());
  return out;
}

std::string method_label(const ProjectionMatrix* proj) {
  return proj != nullptr ? std::string(to_string(proj->method())) : "unaligned";
}

double mean(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

StsGold::StsGold(std::vector<double> scores) : scores_(std::move(scores)) {
  for (std::size_t i = 0; i < scores_.size(); ++i) {
    const double s = scores_[i];
    if (!(s >= kMinScore && s <= kMaxScore)) {
      throw DataError(fmt::format("gold score {} at index {} outside [0,5]", s, i));
    }
  }
}

double cosine(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) {
    throw DataError(fmt::format("cosine: length mismatch ({} vs {})", u.size(), v.size()));
  }
  const double uu = simd::dot(u, u);
  const double vv = simd::dot(v, v);
  if (uu == 0.0 || vv == 0.0) throw DataError("zero vector has no direction");
  const double c = simd::dot(u, v) / (std::sqrt(uu) * std::sqrt(vv));
  return std::clamp(c, -1.0, 1.0);
}

AlignmentReport avg_pair_cosine(const ParallelCorpus& corpus, const ProjectionMatrix* proj) {
  PairCosines pc = pair_cosines(corpus, proj);
  AlignmentReport report;
  report.n_pairs = corpus.pairs();
  report.avg_cosine = mean(pc.values);
  report.residual_frobenius = pc.residual;
  report.per_pair_cosine = std::move(pc.values);
  report.method = method_label(proj);
  return report;
}

double pearson(std::span<const double> x, std::span<const double> y) {
  check_pair_lengths(x, y, "pearson");
  const double mx = mean(x);
  const double my = mean(y);
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw DataError("constant sequence");
  // sqrt of the product keeps identical rank vectors at exactly 1.
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::vector<double> average_ranks(std::span<const double> x) {
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t l, std::size_t r) { return x[l] < x[r]; });
  std::vector<double> ranks(x.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i + 1;
    while (j < order.size() && x[order[j]] == x[order[i]]) ++j;
    // positions i..j-1 hold ranks i+1..j
    const double shared = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = shared;
    i = j;
  }
  return ranks;
}

double spearman(std::span<const double> x, std::span<const double> y) {
  check_pair_lengths(x, y, "spearman");
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  return pearson(rx, ry);
}

AlignmentReport sts_eval(const ParallelCorpus& corpus, const StsGold& gold,
                         const ProjectionMatrix* proj) {
  if (gold.size() != corpus.pairs()) {
    throw DataError(fmt::format("gold has {} scores but corpus has {} pairs", gold.size(),
                                corpus.pairs()));
  }
  PairCosines pc = pair_cosines(corpus, proj);
  AlignmentReport report;
  report.n_pairs = corpus.pairs();
  report.avg_cosine = mean(pc.values);
  report.residual_frobenius = pc.residual;
  report.spearman = spearman(pc.values, gold.scores());
  report.pearson = pearson(pc.values, gold.scores());
  report.per_pair_cosine = std::move(pc.values);
  report.method = method_label(proj);
  report.note =
      "spearman/pearson correlate per-pair cosine with gold scores; rendered in percentile (x100)";
  return report;
}

}  // namespace sentalign
