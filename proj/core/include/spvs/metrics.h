#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace spvs {

struct FScore {
  double precision = 0;
  double recall = 0;
  double f = 0;
};

// Overlap of two frame masks of equal length. P (R) is 0 when the predicted
// (reference) set is empty; F is 0 when P + R is 0.
FScore ComputeFScore(std::span<const std::uint8_t> predicted, std::span<const std::uint8_t> reference);

// Kendall tau-b with tie correction, O(n log n). Empty when either side is
// constant (tau undefined); a warning is emitted in that case.
std::optional<double> KendallTau(std::span<const double> x, std::span<const double> y);

// Pearson correlation of average-tie ranks. Empty when either side has zero
// rank variance.
std::optional<double> SpearmanRho(std::span<const double> x, std::span<const double> y);

// 1-based ranks with ties sharing their average rank.
std::vector<double> AverageRanks(std::span<const double> values);

struct MetricValues {
  std::optional<double> tau;
  std::optional<double> rho;
  std::optional<double> f;
};

struct VideoEvaluation {
  MetricValues mean;
  std::vector<MetricValues> per_annotator;
};

// Scores each annotator separately and averages each metric over the
// annotators where it is defined. predicted_summary/reference_summaries are
// original-rate frame masks; pass an empty reference list to skip F-score.
VideoEvaluation EvaluateVideo(std::span<const double> predicted_scores,
                              const std::vector<std::vector<double>>& annotator_scores,
                              std::span<const std::uint8_t> predicted_summary,
                              const std::vector<std::vector<std::uint8_t>>& reference_summaries);

// Arithmetic mean of the defined values; empty if none are.
std::optional<double> MeanDefined(const std::vector<std::optional<double>>& values);

}  // namespace spvs
