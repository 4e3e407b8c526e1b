#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sentalign/embedding.hpp"
#include "sentalign/solvers.hpp"

namespace sentalign {

/// Gold similarity scores on the 0..5 scale, one per corpus row.
class StsGold {
 public:
  static constexpr double kMinScore = 0.0;
  static constexpr double kMaxScore = 5.0;

  explicit StsGold(std::vector<double> scores);

  const std::vector<double>& scores() const noexcept { return scores_; }
  std::size_t size() const noexcept { return scores_.size(); }

 private:
  std::vector<double> scores_;
};

/// Alignment and STS metrics. Correlations are stored in [-1, 1]; the
/// percentile (x100) form is produced when rendering.
struct AlignmentReport {
  std::size_t n_pairs = 0;
  double avg_cosine = 0.0;
  std::optional<std::vector<double>> per_pair_cosine;
  double residual_frobenius = 0.0;
  std::optional<double> spearman;
  std::optional<double> pearson;
  std::string method;     // e.g. "unaligned", "least_squares"
  std::string timestamp;  // filled in when the report is written
  std::string note;
};

/// Correlation in the percentile convention used for STS tables.
inline double to_percentile(double correlation) noexcept { return 100.0 * correlation; }

/// u·v / (|u||v|), clamped to [-1, 1]. Zero vectors are an error.
double cosine(std::span<const double> u, std::span<const double> v);

/// Mean cosine between (projected) source rows and target rows.
/// Without a projection the rows are compared as they are.
AlignmentReport avg_pair_cosine(const ParallelCorpus& corpus,
                                const ProjectionMatrix* proj = nullptr);

/// Sample Pearson correlation.
double pearson(std::span<const double> x, std::span<const double> y);

/// Fractional ranks starting at 1; tied values share the mean of their ranks.
std::vector<double> average_ranks(std::span<const double> x);

/// Pearson correlation of average ranks.
double spearman(std::span<const double> x, std::span<const double> y);

/// Correlates per-pair cosines (after optional projection) with gold scores.
AlignmentReport sts_eval(const ParallelCorpus& corpus, const StsGold& gold,
                         const ProjectionMatrix* proj = nullptr);

}  // namespace sentalign
