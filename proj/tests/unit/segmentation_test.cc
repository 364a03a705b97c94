#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

#include "grad_cases.h"
#include "oracles.h"
#include "spvs/errors.h"
#include "spvs/segmentation.h"

namespace spvs {
namespace {

using testing::RandomTensor;

// Piecewise-constant features with noise: a few random blocks.
Tensor BlockFeatures(std::size_t t, std::size_t d, Rng& rng, double noise) {
  std::vector<double> v(t * d);
  std::vector<double> proto(d);
  for (std::size_t i = 0; i < t; ++i) {
    if (i == 0 || rng.Uniform() < 0.2) {
      for (double& p : proto) p = rng.Normal();
    }
    for (std::size_t k = 0; k < d; ++k) v[i * d + k] = proto[k] + noise * rng.Normal();
  }
  return Tensor::FromData({t, d}, v);
}

TEST(Kts, ConstantFeaturesHaveNoChangePoints) {
  Tensor f = Tensor::Full({30, 4}, 0.7);
  for (double c : {0.01, 1.0, 10.0}) {
    EXPECT_TRUE(KtsSegment(f, {.max_change_points = 5, .penalty = c}).change_points.empty());
  }
}

TEST(Kts, TwoOrthogonalBlocksSplitInTheMiddle) {
  std::vector<double> v;
  for (int i = 0; i < 12; ++i) {
    v.push_back(i < 6 ? 1.0 : 0.0);
    v.push_back(i < 6 ? 0.0 : 1.0);
  }
  Tensor f = Tensor::FromData({12, 2}, v);
  ShotSegmentation seg = KtsSegment(f, {.max_change_points = 4, .penalty = 0.1});
  EXPECT_EQ(seg.change_points, std::vector<std::size_t>{6});
  auto brute = testing::BruteForceKts(f, 4, 0.1);
  EXPECT_EQ(brute.change_points, std::vector<std::size_t>{6});
}

TEST(Kts, MatchesExhaustiveSearchForShortSequences) {
  Rng rng(3);
  int trials = 0;
  for (std::size_t t = 2; t <= 20; ++t) {
    for (int rep = 0; rep < 3; ++rep) {
      Tensor f = rep == 0 ? RandomTensor({t, 3}, rng) : BlockFeatures(t, 3, rng, 0.2);
      const std::size_t m = std::min<std::size_t>(4, t - 1);
      const double penalty = rng.Uniform(0.01, 0.5);
      ShotSegmentation seg = KtsSegment(f, {.max_change_points = m, .penalty = penalty});
      auto brute = testing::BruteForceKts(f, m, penalty);
      EXPECT_NEAR(testing::KtsObjective(f, seg.change_points, penalty), brute.objective, 1e-9)
          << "T=" << t;
      EXPECT_EQ(seg.change_points, brute.change_points) << "T=" << t;
      ++trials;
    }
  }
  EXPECT_EQ(trials, 57);
}

TEST(Kts, SegmentScatterMatchesDefinition) {
  Rng rng(4);
  Tensor f = RandomTensor({9, 4}, rng);
  auto gram = NormalizedGram(f);
  const std::vector<std::size_t> cps = {};
  for (std::size_t b = 0; b < 9; ++b) {
    for (std::size_t e = b + 1; e <= 9; ++e) {
      // Scatter of a single segment equals the oracle objective with the
      // segment isolated in its own tensor.
      std::vector<double> rows(f.data().begin() + b * 4, f.data().begin() + e * 4);
      Tensor part = Tensor::FromData({e - b, 4}, rows);
      EXPECT_NEAR(SegmentScatter(gram, 9, b, e), testing::KtsObjective(part, cps, 0.0), 1e-12);
    }
  }
}

TEST(Kts, DefaultsAndErrors) {
  Rng rng(5);
  Tensor f = BlockFeatures(35, 4, rng, 0.1);
  ShotSegmentation seg = KtsSegment(f);
  EXPECT_LE(seg.change_points.size(), 4u);  // ceil(35 / 10)
  EXPECT_THROW(KtsSegment(f, {.max_change_points = 35}), ConfigError);
  EXPECT_EQ(KtsSegment(Tensor::Full({1, 3}, 1.0)).ShotCount(), 1u);
}

TEST(Kts, ShotsPartitionTheVideo) {
  Rng rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t t = 10 + rng.UniformInt(60);
    ShotSegmentation seg = KtsSegment(BlockFeatures(t, 5, rng, 0.3));
    auto lengths = seg.ShotLengths();
    EXPECT_EQ(std::accumulate(lengths.begin(), lengths.end(), std::size_t{0}), t);
    for (std::size_t l : lengths) EXPECT_GE(l, 1u);
    for (std::size_t i = 1; i < seg.change_points.size(); ++i)
      EXPECT_LT(seg.change_points[i - 1], seg.change_points[i]);
  }
}

TEST(ShotScores, Examples) {
  ShotSegmentation whole{6, {}};
  std::vector<double> s = {0.1, 0.5, 0.3, 0.9, 0.2, 0.4};
  EXPECT_NEAR(ShotScores(s, whole)[0], 2.4 / 6, 1e-15);
  ShotSegmentation seg{6, {2, 5}};
  std::vector<double> c(6, 0.37);
  for (double v : ShotScores(c, seg)) EXPECT_NEAR(v, 0.37, 1e-15);
  Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> x(6);
    for (double& v : x) v = rng.Uniform();
    auto got = ShotScores(x, seg);
    EXPECT_NEAR(got[0], (x[0] + x[1]) / 2, 1e-12);
    EXPECT_NEAR(got[1], (x[2] + x[3] + x[4]) / 3, 1e-12);
    EXPECT_NEAR(got[2], x[5], 1e-12);
  }
}

TEST(Knapsack, SingleShortShotIsSelectedAndLongShotsAreNot) {
  std::vector<double> v = {0.4};
  std::vector<std::size_t> l = {3};
  EXPECT_EQ(KnapsackSelect(v, l, 5).selected, std::vector<std::uint8_t>{1});
  std::vector<double> v2 = {0.9, 0.8};
  std::vector<std::size_t> l2 = {6, 7};
  Summary s = KnapsackSelect(v2, l2, 5);
  EXPECT_EQ(s.selected, (std::vector<std::uint8_t>{0, 0}));
  EXPECT_EQ(std::count(s.frame_mask.begin(), s.frame_mask.end(), 1), 0);
}

TEST(Knapsack, TieBreaksPreferFewerFramesThenSmallestIndices) {
  // Equal value: {0} uses 4 frames, {1, 2} uses 3.
  std::vector<double> v = {0.5, 0.25, 0.25};
  std::vector<std::size_t> l = {4, 1, 2};
  EXPECT_EQ(KnapsackSelect(v, l, 4).selected, (std::vector<std::uint8_t>{0, 1, 1}));
  // Equal value and frames: {0} beats {1}.
  std::vector<double> v2 = {0.5, 0.5};
  std::vector<std::size_t> l2 = {2, 2};
  EXPECT_EQ(KnapsackSelect(v2, l2, 3).selected, (std::vector<std::uint8_t>{1, 0}));
}

TEST(Knapsack, MatchesEnumerationIncludingTies) {
  Rng rng(8);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t k = 1 + rng.UniformInt(15);
    std::vector<double> values(k);
    std::vector<std::size_t> lengths(k);
    const bool quantized = trial % 2 == 0;  // quantized values create exact ties
    for (std::size_t i = 0; i < k; ++i) {
      values[i] = quantized ? 0.25 * static_cast<double>(rng.UniformInt(4)) : rng.Uniform();
      lengths[i] = 1 + rng.UniformInt(quantized ? 3 : 12);
    }
    const std::size_t total = std::accumulate(lengths.begin(), lengths.end(), std::size_t{0});
    const std::size_t budget = static_cast<std::size_t>(rng.UniformInt(total + 1));
    Summary s = KnapsackSelect(values, lengths, budget);
    auto brute = testing::BruteForceKnapsack(values, lengths, budget);
    std::vector<std::uint8_t> expect(k, 0);
    for (std::size_t i : brute.selected) expect[i] = 1;
    EXPECT_EQ(s.selected, expect) << "trial " << trial;
    EXPECT_NEAR(s.value, brute.value, 1e-12);
  }
}

TEST(Knapsack, NeverWorseThanGreedy) {
  Rng rng(9);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t k = 2 + rng.UniformInt(20);
    std::vector<double> values(k);
    std::vector<std::size_t> lengths(k);
    for (std::size_t i = 0; i < k; ++i) {
      values[i] = rng.Uniform();
      lengths[i] = 1 + rng.UniformInt(10);
    }
    const std::size_t budget = 5 + rng.UniformInt(30);
    std::vector<std::size_t> order(k);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return values[a] / lengths[a] > values[b] / lengths[b];
    });
    double greedy = 0;
    std::size_t used = 0;
    for (std::size_t i : order) {
      if (used + lengths[i] <= budget) {
        used += lengths[i];
        greedy += values[i];
      }
    }
    EXPECT_GE(KnapsackSelect(values, lengths, budget).value, greedy - 1e-12);
  }
}

TEST(Summary, RespectsBudgetAndMaskIsUnionOfShots) {
  Rng rng(10);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t t = 20 + rng.UniformInt(200);
    std::vector<double> scores(t);
    for (double& s : scores) s = rng.Uniform();
    std::vector<std::size_t> cps;
    for (std::size_t i = 1; i < t; ++i)
      if (rng.Uniform() < 0.1) cps.push_back(i);
    ShotSegmentation seg{t, cps};
    Summary s = SummarizeScores(scores, seg);
    EXPECT_EQ(s.budget_frames, static_cast<std::size_t>(0.15 * static_cast<double>(t) + 1e-9));
    const auto selected = std::count(s.frame_mask.begin(), s.frame_mask.end(), 1);
    EXPECT_LE(static_cast<std::size_t>(selected), s.budget_frames);
    ASSERT_EQ(s.frame_mask.size(), t);
    for (std::size_t i = 0; i < seg.ShotCount(); ++i) {
      auto [b, e] = seg.Shot(i);
      for (std::size_t f = b; f < e; ++f) EXPECT_EQ(s.frame_mask[f], s.selected[i]);
    }
  }
}

TEST(Summary, BudgetFramesIsFloorOfFraction) {
  EXPECT_EQ(BudgetFrames(100, 0.15), 15u);
  EXPECT_EQ(BudgetFrames(20, 0.15), 3u);
  EXPECT_EQ(BudgetFrames(6, 0.15), 0u);
  EXPECT_EQ(BudgetFrames(7, 0.15), 1u);
}

TEST(Summary, MeanTimesLengthValueOption) {
  std::vector<double> scores = {0.9, 0.5, 0.5, 0.5, 0.5};
  ShotSegmentation seg{5, {1}};
  // Mean value prefers the short high shot; mean-times-length the long one.
  EXPECT_EQ(SummarizeScores(scores, seg, 0.9).selected, (std::vector<std::uint8_t>{1, 0}));
  EXPECT_EQ(SummarizeScores(scores, seg, 0.9, ShotValue::kMeanTimesLength).selected,
            (std::vector<std::uint8_t>{0, 1}));
}

TEST(Expand, IdentityAllTrueAndLoopOracle) {
  std::vector<std::uint8_t> mask = {1, 0, 1, 1};
  std::vector<std::int64_t> identity = {0, 1, 2, 3};
  EXPECT_EQ(ExpandToOriginal(mask, identity, 4), mask);
  std::vector<std::uint8_t> ones(4, 1);
  std::vector<std::int64_t> picks = {0, 15, 30, 45};
  EXPECT_EQ(ExpandToOriginal(ones, picks, 60), std::vector<std::uint8_t>(60, 1));
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 1 + rng.UniformInt(20);
    std::vector<std::int64_t> p;
    std::int64_t at = static_cast<std::int64_t>(rng.UniformInt(3));
    std::vector<std::uint8_t> m(n);
    for (std::size_t i = 0; i < n; ++i) {
      p.push_back(at);
      at += 1 + static_cast<std::int64_t>(rng.UniformInt(5));
      m[i] = rng.Bernoulli(0.5);
    }
    const std::int64_t total = at + static_cast<std::int64_t>(rng.UniformInt(4));
    auto out = ExpandToOriginal(m, p, total);
    ASSERT_EQ(out.size(), static_cast<std::size_t>(total));
    for (std::int64_t f = 0; f < total; ++f) {
      std::uint8_t expect = 0;
      for (std::size_t i = 0; i < n; ++i)
        if (p[i] <= f) expect = m[i];
      EXPECT_EQ(out[f], expect);
    }
  }
}

TEST(Expand, NonMonotonePicksAreDataError) {
  std::vector<std::uint8_t> mask = {1, 1};
  std::vector<std::int64_t> picks = {5, 3};
  EXPECT_THROW(ExpandToOriginal(mask, picks, 10), DataError);
}

}  // namespace
}  // namespace spvs
