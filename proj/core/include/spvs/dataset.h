#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "spvs/tensor.h"
#include "spvs/text.h"

namespace spvs {

inline constexpr int kDatasetSchemaVersion = 1;

// One video: subsampled frame features plus the mapping back to original
// frames, its text and any human annotations.
struct DatasetRecord {
  std::string id;
  std::size_t frames = 0;
  std::size_t dim = 0;
  std::vector<float> features;  // frames x dim, row-major
  double fps_original = 2.0;
  std::vector<std::int64_t> picks;       // original-frame index of each row
  std::int64_t original_frames = 0;      // frame count of the source video
  TextBundle text;
  std::vector<std::vector<double>> annotations;        // per annotator, length frames
  std::vector<std::vector<std::uint8_t>> user_summaries;  // per annotator, original rate
  std::vector<double> planted;  // generator ground truth, synthetic corpora only

  Tensor FeatureTensor() const;
  // Mean over annotators, per frame.
  std::vector<double> MeanAnnotation() const;
  // Throws DataError naming the record when an invariant fails.
  void Validate() const;
};

enum class FeatureStorage { kInline, kBlob };

// JSON-lines, one record per line. With kBlob the features of record `id`
// are written next to the dataset as "<stem>.<id>.f32".
void SaveDataset(const std::filesystem::path& path, const std::vector<DatasetRecord>& records,
                 FeatureStorage storage = FeatureStorage::kInline);
std::vector<DatasetRecord> LoadDataset(const std::filesystem::path& path);

struct SubsampleResult {
  std::vector<float> features;
  std::vector<std::int64_t> picks;
  std::size_t frames = 0;
};

// Keeps every round(fps/2)-th frame so the result runs at about 2 FPS.
// fps < 2 passes through unchanged with a warning.
SubsampleResult Subsample(const std::vector<float>& features, std::size_t frames,
                          std::size_t dim, double fps_original);

}  // namespace spvs
