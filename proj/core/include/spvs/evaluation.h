#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "spvs/dataset.h"
#include "spvs/metrics.h"
#include "spvs/segmentation.h"

namespace spvs {

struct EvaluationOptions {
  double budget = 0.15;
  KtsOptions kts;
  ShotValue shot_value = ShotValue::kMeanScore;
};

struct RecordEvaluation {
  VideoEvaluation metrics;
  std::optional<double> tau_planted;  // against generator ground truth, if any
  ShotSegmentation segmentation;
  Summary summary;
};

// Segments the record's features with KTS, builds the budgeted summary of
// `scores`, and compares against every annotator. Annotators without a user
// summary get one generated from their own scores the same way.
RecordEvaluation EvaluateRecord(const DatasetRecord& record, std::span<const double> scores,
                                const EvaluationOptions& options = {});

struct MetricSummary {
  std::optional<double> tau;
  std::optional<double> rho;
  std::optional<double> f;
  std::optional<double> tau_planted;
  std::size_t videos = 0;
};

struct EvaluationReport {
  std::vector<MetricSummary> folds;
  MetricSummary fold_mean;  // mean of the per-fold means
  MetricSummary overall;    // mean over all videos
};

// Groups per-video results by fold (fold[i] < fold_count) and averages.
EvaluationReport AggregateEvaluations(std::span<const RecordEvaluation> evaluations,
                                      std::span<const std::size_t> fold, std::size_t fold_count);

}  // namespace spvs
