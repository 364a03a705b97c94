#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "spvs/tensor.h"

namespace spvs {

struct ShotSegmentation {
  std::size_t frames = 0;
  // Strictly increasing, each in (0, frames).
  std::vector<std::size_t> change_points;

  std::size_t ShotCount() const { return change_points.size() + 1; }
  // [begin, end) of shot i.
  std::pair<std::size_t, std::size_t> Shot(std::size_t i) const;
  std::vector<std::size_t> ShotLengths() const;
};

struct KtsOptions {
  // Largest number of change points considered; 0 selects ceil(T/10)
  // (capped at T-1).
  std::size_t max_change_points = 0;
  double penalty = 1.0;
};

// Kernel temporal segmentation with a dot-product kernel on L2-normalized
// rows. Minimizes total within-shot scatter plus
// penalty * m * (log(T/m) + 1) over the number of change points m by exact
// dynamic programming on prefix-summed segment costs.
ShotSegmentation KtsSegment(const Tensor& features, const KtsOptions& options = {});

// Within-segment scatter of rows [begin, end) of a Gram matrix, exposed for
// oracles: sum_t K_tt - (1/len) sum_{t,t'} K_tt'.
double SegmentScatter(std::span<const double> gram, std::size_t n, std::size_t begin,
                      std::size_t end);
// Gram matrix of the L2-normalized rows.
std::vector<double> NormalizedGram(const Tensor& features);
double KtsPenalty(std::size_t frames, std::size_t change_points, double penalty);

// Mean of scores over each shot.
std::vector<double> ShotScores(std::span<const double> scores, const ShotSegmentation& seg);

struct Summary {
  std::vector<std::uint8_t> selected;    // per shot
  std::vector<std::uint8_t> frame_mask;  // per frame
  std::size_t budget_frames = 0;
  double value = 0;
};

// floor(fraction * frames), robust to representation error in fraction.
std::size_t BudgetFrames(std::size_t frames, double fraction);

// Exact 0/1 knapsack maximizing total shot value under the frame budget. Ties
// go to fewer selected frames, then to the lexicographically smallest set of
// shot indices.
Summary KnapsackSelect(std::span<const double> values, std::span<const std::size_t> lengths,
                       std::size_t budget_frames);

enum class ShotValue { kMeanScore, kMeanTimesLength };

// Segment-level summary of a score sequence under a length budget.
Summary SummarizeScores(std::span<const double> scores, const ShotSegmentation& seg,
                        double budget_fraction = 0.15, ShotValue value = ShotValue::kMeanScore);

// Spreads a per-subsampled-frame mask onto original frames:
// flag i covers [picks[i], picks[i+1]) and the last flag runs to the end.
std::vector<std::uint8_t> ExpandToOriginal(std::span<const std::uint8_t> mask,
                                           std::span<const std::int64_t> picks,
                                           std::int64_t original_frames);

}  // namespace spvs
