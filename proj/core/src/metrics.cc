#include "spvs/metrics.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "spvs/errors.h"

namespace spvs {
namespace {

void RequirePaired(std::span<const double> x, std::span<const double> y, const char* what) {
  if (x.size() != y.size()) {
    throw DimensionError(std::string(what) + ": sequences of length " + std::to_string(x.size()) +
                         " and " + std::to_string(y.size()));
  }
  if (x.size() < 2) throw DimensionError(std::string(what) + ": need at least two values");
}

// Number of tied pairs among consecutive equal runs of a sorted sequence.
template <typename Equal>
std::int64_t TiedPairs(std::size_t n, Equal equal) {
  std::int64_t ties = 0, run = 1;
  for (std::size_t i = 1; i <= n; ++i) {
    if (i < n && equal(i - 1, i)) {
      ++run;
    } else {
      ties += run * (run - 1) / 2;
      run = 1;
    }
  }
  return ties;
}

// Sorts values in place, returning the number of inversions (swaps).
std::int64_t MergeCountInversions(std::vector<double>& v, std::vector<double>& buf,
                                  std::size_t lo, std::size_t hi) {
  if (hi - lo < 2) return 0;
  const std::size_t mid = lo + (hi - lo) / 2;
  std::int64_t inv = MergeCountInversions(v, buf, lo, mid) + MergeCountInversions(v, buf, mid, hi);
  std::size_t i = lo, j = mid, k = lo;
  while (i < mid && j < hi) {
    if (v[j] < v[i]) {
      inv += static_cast<std::int64_t>(mid - i);
      buf[k++] = v[j++];
    } else {
      buf[k++] = v[i++];
    }
  }
  while (i < mid) buf[k++] = v[i++];
  while (j < hi) buf[k++] = v[j++];
  std::copy(buf.begin() + static_cast<std::ptrdiff_t>(lo), buf.begin() + static_cast<std::ptrdiff_t>(hi),
            v.begin() + static_cast<std::ptrdiff_t>(lo));
  return inv;
}

}  // namespace

FScore ComputeFScore(std::span<const std::uint8_t> predicted,
                     std::span<const std::uint8_t> reference) {
  if (predicted.size() != reference.size()) {
    throw DimensionError("f-score: masks of length " + std::to_string(predicted.size()) + " and " +
                         std::to_string(reference.size()));
  }
  std::size_t both = 0, pred = 0, ref = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const bool p = predicted[i] != 0, r = reference[i] != 0;
    both += p && r;
    pred += p;
    ref += r;
  }
  FScore s;
  s.precision = pred ? static_cast<double>(both) / static_cast<double>(pred) : 0.0;
  s.recall = ref ? static_cast<double>(both) / static_cast<double>(ref) : 0.0;
  s.f = (s.precision + s.recall) > 0
            ? 2 * s.precision * s.recall / (s.precision + s.recall)
            : 0.0;
  return s;
}

std::optional<double> KendallTau(std::span<const double> x, std::span<const double> y) {
  RequirePaired(x, y, "kendall_tau");
  const std::size_t n = x.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return x[a] != x[b] ? x[a] < x[b] : y[a] < y[b];
  });
  const std::int64_t x_ties =
      TiedPairs(n, [&](std::size_t a, std::size_t b) { return x[order[a]] == x[order[b]]; });
  const std::int64_t joint_ties = TiedPairs(n, [&](std::size_t a, std::size_t b) {
    return x[order[a]] == x[order[b]] && y[order[a]] == y[order[b]];
  });
  std::vector<double> ys(n), buf(n);
  for (std::size_t i = 0; i < n; ++i) ys[i] = y[order[i]];
  const std::int64_t swaps = MergeCountInversions(ys, buf, 0, n);
  const std::int64_t y_ties =
      TiedPairs(n, [&](std::size_t a, std::size_t b) { return ys[a] == ys[b]; });
  const std::int64_t total = static_cast<std::int64_t>(n) * static_cast<std::int64_t>(n - 1) / 2;
  if (x_ties == total || y_ties == total) {
    Warn("kendall_tau undefined: one sequence is constant");
    return std::nullopt;
  }
  const std::int64_t con_minus_dis = total - x_ties - y_ties + joint_ties - 2 * swaps;
  const double denom = std::sqrt(static_cast<double>(total - x_ties)) *
                       std::sqrt(static_cast<double>(total - y_ties));
  return std::clamp(static_cast<double>(con_minus_dis) / denom, -1.0, 1.0);
}

std::vector<double> AverageRanks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i + 1;
    while (j < n && values[order[j]] == values[order[i]]) ++j;
    // Positions i..j-1 share rank ((i+1) + j) / 2.
    const double rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = rank;
    i = j;
  }
  return ranks;
}

std::optional<double> SpearmanRho(std::span<const double> x, std::span<const double> y) {
  RequirePaired(x, y, "spearman_rho");
  const std::vector<double> rx = AverageRanks(x), ry = AverageRanks(y);
  const double n = static_cast<double>(x.size());
  const double mean = (n + 1) / 2;  // average rank is invariant to ties
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    const double dx = rx[i] - mean, dy = ry[i] - mean;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0 || syy == 0) {
    Warn("spearman_rho undefined: zero rank variance");
    return std::nullopt;
  }
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::optional<double> MeanDefined(const std::vector<std::optional<double>>& values) {
  double s = 0;
  std::size_t n = 0;
  for (const auto& v : values) {
    if (v) {
      s += *v;
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return s / static_cast<double>(n);
}

VideoEvaluation EvaluateVideo(std::span<const double> predicted_scores,
                              const std::vector<std::vector<double>>& annotator_scores,
                              std::span<const std::uint8_t> predicted_summary,
                              const std::vector<std::vector<std::uint8_t>>& reference_summaries) {
  if (annotator_scores.empty()) throw DataError("evaluate: at least one annotator is required");
  VideoEvaluation ev;
  const std::size_t annotators = std::max(annotator_scores.size(), reference_summaries.size());
  std::vector<std::optional<double>> taus, rhos, fs;
  for (std::size_t a = 0; a < annotators; ++a) {
    MetricValues m;
    if (a < annotator_scores.size()) {
      if (annotator_scores[a].size() != predicted_scores.size()) {
        throw DataError("evaluate: annotator " + std::to_string(a) + " has " +
                        std::to_string(annotator_scores[a].size()) + " scores for " +
                        std::to_string(predicted_scores.size()) + " frames");
      }
      m.tau = KendallTau(predicted_scores, annotator_scores[a]);
      m.rho = SpearmanRho(predicted_scores, annotator_scores[a]);
    }
    if (a < reference_summaries.size()) {
      if (reference_summaries[a].size() != predicted_summary.size()) {
        throw DataError("evaluate: summary of annotator " + std::to_string(a) + " covers " +
                        std::to_string(reference_summaries[a].size()) + " frames, expected " +
                        std::to_string(predicted_summary.size()));
      }
      m.f = ComputeFScore(predicted_summary, reference_summaries[a]).f;
    }
    taus.push_back(m.tau);
    rhos.push_back(m.rho);
    fs.push_back(m.f);
    ev.per_annotator.push_back(m);
  }
  ev.mean.tau = MeanDefined(taus);
  ev.mean.rho = MeanDefined(rhos);
  ev.mean.f = MeanDefined(fs);
  return ev;
}

}  // namespace spvs
