#include "spvs/segmentation.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "spvs/errors.h"

namespace spvs {

std::pair<std::size_t, std::size_t> ShotSegmentation::Shot(std::size_t i) const {
  const std::size_t begin = i == 0 ? 0 : change_points.at(i - 1);
  const std::size_t end = i == change_points.size() ? frames : change_points.at(i);
  return {begin, end};
}

std::vector<std::size_t> ShotSegmentation::ShotLengths() const {
  std::vector<std::size_t> lengths;
  for (std::size_t i = 0; i < ShotCount(); ++i) {
    auto [b, e] = Shot(i);
    lengths.push_back(e - b);
  }
  return lengths;
}

std::vector<double> NormalizedGram(const Tensor& features) {
  const std::size_t n = features.rows(), d = features.cols();
  auto x = features.data();
  std::vector<double> unit(x.begin(), x.end());
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0;
    for (std::size_t j = 0; j < d; ++j) s += unit[i * d + j] * unit[i * d + j];
    if (s == 0) continue;
    const double inv = 1.0 / std::sqrt(s);
    for (std::size_t j = 0; j < d; ++j) unit[i * d + j] *= inv;
  }
  std::vector<double> gram(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = i; k < n; ++k) {
      double s = 0;
      for (std::size_t j = 0; j < d; ++j) s += unit[i * d + j] * unit[k * d + j];
      gram[i * n + k] = gram[k * n + i] = s;
    }
  }
  return gram;
}

double SegmentScatter(std::span<const double> gram, std::size_t n, std::size_t begin,
                      std::size_t end) {
  double diag = 0, block = 0;
  for (std::size_t t = begin; t < end; ++t) {
    diag += gram[t * n + t];
    for (std::size_t u = begin; u < end; ++u) block += gram[t * n + u];
  }
  return diag - block / static_cast<double>(end - begin);
}

double KtsPenalty(std::size_t frames, std::size_t change_points, double penalty) {
  if (change_points == 0) return 0.0;
  const double m = static_cast<double>(change_points);
  return penalty * m * (std::log(static_cast<double>(frames) / m) + 1.0);
}

ShotSegmentation KtsSegment(const Tensor& features, const KtsOptions& options) {
  if (features.rank() != 2) {
    throw DimensionError("kts: features must be a matrix, got " + ShapeToString(features.shape()));
  }
  const std::size_t n = features.rows();
  std::size_t max_cp = options.max_change_points;
  if (max_cp == 0) max_cp = std::min<std::size_t>((n + 9) / 10, n - 1);
  else if (max_cp >= n) {
    throw ConfigError("kts: max change points " + std::to_string(max_cp) +
                      " must be below the frame count " + std::to_string(n));
  }

  const std::vector<double> gram = NormalizedGram(features);
  // prefix[i][j] = sum of gram over rows < i, cols < j
  const std::size_t w = n + 1;
  std::vector<double> prefix(w * w, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      prefix[(i + 1) * w + j + 1] =
          gram[i * n + j] + prefix[i * w + j + 1] + prefix[(i + 1) * w + j] - prefix[i * w + j];
  std::vector<double> diag(w, 0.0);
  for (std::size_t i = 0; i < n; ++i) diag[i + 1] = diag[i] + gram[i * n + i];
  auto cost = [&](std::size_t a, std::size_t b) {
    const double block = prefix[b * w + b] - prefix[a * w + b] - prefix[b * w + a] + prefix[a * w + a];
    return (diag[b] - diag[a]) - block / static_cast<double>(b - a);
  };

  // best[m][t]: min scatter of frames [0, t) split into m+1 shots.
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> best(max_cp + 1, std::vector<double>(w, inf));
  std::vector<std::vector<std::size_t>> from(max_cp + 1, std::vector<std::size_t>(w, 0));
  for (std::size_t t = 1; t <= n; ++t) best[0][t] = cost(0, t);
  for (std::size_t m = 1; m <= max_cp; ++m) {
    for (std::size_t t = m + 1; t <= n; ++t) {
      for (std::size_t s = m; s < t; ++s) {
        const double c = best[m - 1][s] + cost(s, t);
        if (c < best[m][t]) {
          best[m][t] = c;
          from[m][t] = s;
        }
      }
    }
  }

  std::size_t chosen = 0;
  double chosen_obj = inf;
  for (std::size_t m = 0; m <= max_cp; ++m) {
    const double obj = best[m][n] + KtsPenalty(n, m, options.penalty);
    if (obj < chosen_obj) {
      chosen_obj = obj;
      chosen = m;
    }
  }

  ShotSegmentation seg;
  seg.frames = n;
  std::size_t t = n;
  for (std::size_t m = chosen; m > 0; --m) {
    t = from[m][t];
    seg.change_points.push_back(t);
  }
  std::reverse(seg.change_points.begin(), seg.change_points.end());
  return seg;
}

std::vector<double> ShotScores(std::span<const double> scores, const ShotSegmentation& seg) {
  if (scores.size() != seg.frames) {
    throw DimensionError("shot_scores: " + std::to_string(scores.size()) + " scores for " +
                         std::to_string(seg.frames) + " frames");
  }
  std::vector<double> out;
  for (std::size_t i = 0; i < seg.ShotCount(); ++i) {
    auto [b, e] = seg.Shot(i);
    double s = 0;
    for (std::size_t t = b; t < e; ++t) s += scores[t];
    out.push_back(s / static_cast<double>(e - b));
  }
  return out;
}

std::size_t BudgetFrames(std::size_t frames, double fraction) {
  return static_cast<std::size_t>(std::floor(fraction * static_cast<double>(frames) + 1e-9));
}

namespace {

bool NearlyEqual(double a, double b) {
  return std::abs(a - b) <= 1e-12 * std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace

Summary KnapsackSelect(std::span<const double> values, std::span<const std::size_t> lengths,
                       std::size_t budget_frames) {
  if (values.size() != lengths.size()) {
    throw DimensionError("knapsack: values and lengths differ in size");
  }
  const std::size_t k = values.size();
  const std::size_t cap = budget_frames;
  // Suffix DP: cell (i, c) is the best subset of shots [i, k) with at most c
  // frames. Scanning shots from the back and preferring inclusion on exact
  // ties yields the lexicographically smallest index set.
  struct Cell {
    double value = 0;
    std::size_t frames = 0;
  };
  std::vector<std::vector<Cell>> dp(k + 1, std::vector<Cell>(cap + 1));
  std::vector<std::vector<std::uint8_t>> take(k, std::vector<std::uint8_t>(cap + 1, 0));
  for (std::size_t i = k; i-- > 0;) {
    if (lengths[i] == 0) throw DomainError("knapsack: shot lengths must be positive");
    for (std::size_t c = 0; c <= cap; ++c) {
      Cell skip = dp[i + 1][c];
      dp[i][c] = skip;
      if (lengths[i] > c) continue;
      Cell with = dp[i + 1][c - lengths[i]];
      with.value += values[i];
      with.frames += lengths[i];
      bool better;
      if (!NearlyEqual(with.value, skip.value)) {
        better = with.value > skip.value;
      } else {
        better = with.frames <= skip.frames;
      }
      if (better) {
        dp[i][c] = with;
        take[i][c] = 1;
      }
    }
  }
  Summary summary;
  summary.budget_frames = budget_frames;
  summary.selected.assign(k, 0);
  std::size_t c = cap;
  for (std::size_t i = 0; i < k; ++i) {
    if (take[i][c]) {
      summary.selected[i] = 1;
      summary.value += values[i];
      c -= lengths[i];
    }
  }
  for (std::size_t i = 0; i < k; ++i) {
    summary.frame_mask.insert(summary.frame_mask.end(), lengths[i], summary.selected[i]);
  }
  return summary;
}

Summary SummarizeScores(std::span<const double> scores, const ShotSegmentation& seg,
                        double budget_fraction, ShotValue value) {
  std::vector<double> shot_values = ShotScores(scores, seg);
  const std::vector<std::size_t> lengths = seg.ShotLengths();
  if (value == ShotValue::kMeanTimesLength) {
    for (std::size_t i = 0; i < shot_values.size(); ++i)
      shot_values[i] *= static_cast<double>(lengths[i]);
  }
  return KnapsackSelect(shot_values, lengths, BudgetFrames(seg.frames, budget_fraction));
}

std::vector<std::uint8_t> ExpandToOriginal(std::span<const std::uint8_t> mask,
                                           std::span<const std::int64_t> picks,
                                           std::int64_t original_frames) {
  if (mask.size() != picks.size()) {
    throw DimensionError("expand: mask of length " + std::to_string(mask.size()) + " with " +
                         std::to_string(picks.size()) + " picks");
  }
  for (std::size_t i = 0; i < picks.size(); ++i) {
    if (picks[i] < 0 || picks[i] >= original_frames || (i > 0 && picks[i] <= picks[i - 1])) {
      throw DataError("expand: picks must be strictly increasing within [0, " +
                      std::to_string(original_frames) + ")");
    }
  }
  std::vector<std::uint8_t> out(static_cast<std::size_t>(original_frames), 0);
  for (std::size_t i = 0; i < picks.size(); ++i) {
    const auto begin = static_cast<std::size_t>(picks[i]);
    const auto end = i + 1 < picks.size() ? static_cast<std::size_t>(picks[i + 1])
                                          : static_cast<std::size_t>(original_frames);
    std::fill(out.begin() + static_cast<std::ptrdiff_t>(begin),
              out.begin() + static_cast<std::ptrdiff_t>(end), mask[i]);
  }
  return out;
}

}  // namespace spvs
