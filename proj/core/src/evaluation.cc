#include "spvs/evaluation.h"

#include "spvs/errors.h"

namespace spvs {

RecordEvaluation EvaluateRecord(const DatasetRecord& record, std::span<const double> scores,
                                const EvaluationOptions& options) {
  if (scores.size() != record.frames) {
    throw DataError("video '" + record.id + "': " + std::to_string(scores.size()) +
                    " scores for " + std::to_string(record.frames) + " frames");
  }
  if (record.annotations.empty()) {
    throw DataError("video '" + record.id + "' has no annotations to evaluate against");
  }
  RecordEvaluation out;
  out.segmentation = KtsSegment(record.FeatureTensor(), options.kts);
  out.summary = SummarizeScores(scores, out.segmentation, options.budget, options.shot_value);
  std::vector<std::uint8_t> predicted =
      ExpandToOriginal(out.summary.frame_mask, record.picks, record.original_frames);

  std::vector<std::vector<std::uint8_t>> references;
  for (std::size_t a = 0; a < record.annotations.size(); ++a) {
    if (a < record.user_summaries.size() && !record.user_summaries[a].empty()) {
      references.push_back(record.user_summaries[a]);
    } else {
      Summary s = SummarizeScores(record.annotations[a], out.segmentation, options.budget,
                                  options.shot_value);
      references.push_back(ExpandToOriginal(s.frame_mask, record.picks, record.original_frames));
    }
  }
  try {
    out.metrics = EvaluateVideo(scores, record.annotations, predicted, references);
  } catch (const DataError& e) {
    throw DataError("video '" + record.id + "': " + e.what());
  }
  if (!record.planted.empty()) out.tau_planted = KendallTau(scores, record.planted);
  return out;
}

namespace {

MetricSummary Average(const std::vector<const RecordEvaluation*>& items) {
  std::vector<std::optional<double>> tau, rho, f, planted;
  for (const RecordEvaluation* e : items) {
    tau.push_back(e->metrics.mean.tau);
    rho.push_back(e->metrics.mean.rho);
    f.push_back(e->metrics.mean.f);
    planted.push_back(e->tau_planted);
  }
  MetricSummary m;
  m.tau = MeanDefined(tau);
  m.rho = MeanDefined(rho);
  m.f = MeanDefined(f);
  m.tau_planted = MeanDefined(planted);
  m.videos = items.size();
  return m;
}

}  // namespace

EvaluationReport AggregateEvaluations(std::span<const RecordEvaluation> evaluations,
                                      std::span<const std::size_t> fold, std::size_t fold_count) {
  if (evaluations.size() != fold.size()) {
    throw ContractError("AggregateEvaluations: one fold index per evaluation is required");
  }
  std::vector<std::vector<const RecordEvaluation*>> groups(fold_count);
  std::vector<const RecordEvaluation*> all;
  for (std::size_t i = 0; i < evaluations.size(); ++i) {
    if (fold[i] >= fold_count) throw DataError("fold index out of range");
    groups[fold[i]].push_back(&evaluations[i]);
    all.push_back(&evaluations[i]);
  }
  EvaluationReport report;
  std::vector<std::optional<double>> tau, rho, f, planted;
  for (const auto& g : groups) {
    MetricSummary m = Average(g);
    tau.push_back(m.tau);
    rho.push_back(m.rho);
    f.push_back(m.f);
    planted.push_back(m.tau_planted);
    report.folds.push_back(m);
  }
  report.fold_mean.tau = MeanDefined(tau);
  report.fold_mean.rho = MeanDefined(rho);
  report.fold_mean.f = MeanDefined(f);
  report.fold_mean.tau_planted = MeanDefined(planted);
  report.fold_mean.videos = evaluations.size();
  report.overall = Average(all);
  return report;
}

}  // namespace spvs
