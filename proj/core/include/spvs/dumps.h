#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "spvs/encoders.h"
#include "spvs/evaluation.h"
#include "spvs/progressive.h"
#include "spvs/ssl.h"
#include "spvs/text.h"

namespace spvs {

// Score dumps: JSON lines of
// {"id", "fold", "stage_scores": [[...]], "final_scores": [...], "picks": [...]}.
std::string ScoresToJsonLines(const std::vector<VideoScores>& scores);
std::vector<VideoScores> ParseScores(const std::string& text, const std::string& origin);
std::vector<VideoScores> LoadScores(const std::filesystem::path& path);

struct SegmentRecord {
  std::string id;
  ShotSegmentation segmentation;
  std::vector<double> shot_scores;   // empty when no scores were given
  std::optional<Summary> summary;
  std::vector<std::int64_t> summary_frames;  // selected original frames
};
std::string SegmentsToJsonLines(const std::vector<SegmentRecord>& segments);

struct VideoMetrics {
  std::string id;
  std::size_t fold = 0;
  RecordEvaluation evaluation;
};
std::string EvaluationReportToJson(const EvaluationReport& report,
                                   const std::vector<VideoMetrics>& videos);
// Reads the "fold_mean" block back.
MetricSummary ParseFoldMean(const std::string& report_json);

std::string SslStepToJson(const SslStepReport& report);
std::string SslEvaluationToJson(const SslEvaluation& evaluation);

struct AblationRow {
  std::size_t stages = 1;
  bool pretrained = false;
  bool use_text = false;
  MetricSummary metrics;
};
std::string AblationCsv(const std::vector<AblationRow>& rows);

// Everything needed to rebuild a model around a checkpoint, stored next to it
// as "<checkpoint>.meta.json".
struct ModelMeta {
  EncoderConfig encoder;
  std::size_t stages = 1;
  bool use_text = false;
  std::vector<std::string> vocabulary;  // words after the reserved tokens
};
std::filesystem::path MetaPathFor(const std::filesystem::path& checkpoint);
std::string ModelMetaToJson(const ModelMeta& meta);
ModelMeta ParseModelMeta(const std::string& text, const std::string& origin);
void SaveModelMeta(const std::filesystem::path& checkpoint, const ModelMeta& meta);
ModelMeta LoadModelMeta(const std::filesystem::path& checkpoint);

}  // namespace spvs
