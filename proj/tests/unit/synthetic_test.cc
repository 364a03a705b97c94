#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <map>

#include "spvs/errors.h"
#include "spvs/synthetic.h"
#include "spvs/text.h"

namespace spvs {
namespace {

SyntheticOptions Small(std::uint64_t seed = 3) {
  SyntheticOptions o;
  o.videos = 12;
  o.frames = 40;
  o.dim = 8;
  o.vocab = 60;
  o.topics = 4;
  o.seed = seed;
  return o;
}

TEST(Synthetic, DeterministicForSeedAndSensitiveToIt) {
  const auto a = GenerateSynthetic(Small(3));
  const auto b = GenerateSynthetic(Small(3));
  const auto c = GenerateSynthetic(Small(4));
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    ASSERT_EQ(a[i].features.size(), b[i].features.size());
    EXPECT_EQ(std::memcmp(a[i].features.data(), b[i].features.data(), a[i].features.size() * 4), 0);
    EXPECT_EQ(a[i].planted, b[i].planted);
    EXPECT_EQ(a[i].annotations, b[i].annotations);
    EXPECT_EQ(a[i].text.description, b[i].text.description);
  }
  EXPECT_NE(a[0].features, c[0].features);
}

TEST(Synthetic, RecordsAreValidAndShaped) {
  const auto o = Small();
  for (const auto& r : GenerateSynthetic(o)) {
    EXPECT_NO_THROW(r.Validate());
    EXPECT_EQ(r.frames, o.frames);
    EXPECT_EQ(r.dim, o.dim);
    EXPECT_EQ(r.annotations.size(), o.annotators);
    EXPECT_EQ(r.picks[1] - r.picks[0], 15);
    EXPECT_FALSE(r.text.category.empty());
    EXPECT_FALSE(r.text.title.empty());
    for (const auto& a : r.annotations)
      for (double v : a) EXPECT_TRUE(v >= 0.0 && v <= 1.0);
  }
}

TEST(Synthetic, PlantedScoresSpanHighAndLowPerVideo) {
  for (std::uint64_t seed : {1, 2, 3}) {
    for (std::size_t frames : {16, 17, 40, 128}) {
      SyntheticOptions o = Small(seed);
      o.frames = frames;
      o.videos = 30;
      for (const auto& r : GenerateSynthetic(o)) {
        ASSERT_EQ(r.planted.size(), frames);
        for (double v : r.planted) EXPECT_TRUE(v >= 0.0 && v <= 1.0);
        EXPECT_GT(*std::max_element(r.planted.begin(), r.planted.end()), 0.7) << r.id;
        EXPECT_LT(*std::min_element(r.planted.begin(), r.planted.end()), 0.3) << r.id;
      }
    }
  }
}

TEST(Synthetic, WordsSurviveCleaning) {
  const auto words = SyntheticWords(200, 5);
  ASSERT_EQ(words.size(), 200u);
  for (const auto& w : words) EXPECT_EQ(CleanText(w), std::vector<std::string>{w});
  auto sorted = words;
  std::sort(sorted.begin(), sorted.end());
  EXPECT_EQ(std::adjacent_find(sorted.begin(), sorted.end()), sorted.end());
}

TEST(Synthetic, ValidateRejectsBadOptions) {
  auto bad = [](auto mutate) {
    SyntheticOptions o;
    mutate(o);
    return o;
  };
  EXPECT_THROW(bad([](auto& o) { o.frames = 15; }).Validate(), ConfigError);
  EXPECT_THROW(bad([](auto& o) { o.vocab = 19; }).Validate(), ConfigError);
  EXPECT_THROW(bad([](auto& o) { o.topics = 1; }).Validate(), ConfigError);
  EXPECT_THROW(bad([](auto& o) { o.vocab = 20; o.topics = 10; }).Validate(), ConfigError);
  EXPECT_THROW(bad([](auto& o) { o.videos = 0; }).Validate(), ConfigError);
  EXPECT_THROW(bad([](auto& o) { o.fps = 0; }).Validate(), ConfigError);
  EXPECT_THROW(bad([](auto& o) { o.feature_noise = -1; }).Validate(), ConfigError);
  EXPECT_NO_THROW(SyntheticOptions{}.Validate());
}

// Solves (A + lambda I) x = b for every column of b by Gaussian elimination
// with partial pivoting. A is n x n, b is n x m, both row-major.
std::vector<double> RidgeSolve(std::vector<double> a, std::vector<double> b, std::size_t n,
                               std::size_t m, double lambda) {
  for (std::size_t i = 0; i < n; ++i) a[i * n + i] += lambda;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(a[r * n + col]) > std::abs(a[pivot * n + col])) pivot = r;
    for (std::size_t k = 0; k < n; ++k) std::swap(a[col * n + k], a[pivot * n + k]);
    for (std::size_t k = 0; k < m; ++k) std::swap(b[col * m + k], b[pivot * m + k]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = a[r * n + col] / a[col * n + col];
      if (f == 0) continue;
      for (std::size_t k = col; k < n; ++k) a[r * n + k] -= f * a[col * n + k];
      for (std::size_t k = 0; k < m; ++k) b[r * m + k] -= f * b[col * m + k];
    }
  }
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t k = 0; k < m; ++k) b[r * m + k] /= a[r * n + r];
  return b;
}

double Cosine(const std::vector<double>& a, const std::vector<double>& b) {
  double ab = 0, aa = 0, bb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  return ab / std::sqrt(aa * bb + 1e-300);
}

// A ridge regression from bag-of-words to mean frame feature must tell a
// video's own text from another video's text; otherwise the correspondence
// task would be unlearnable.
TEST(Synthetic, TextPredictsVideoContentUnderALinearProbe) {
  SyntheticOptions o;
  o.videos = 120;
  o.frames = 48;
  o.dim = 16;
  o.vocab = 80;
  o.topics = 6;
  o.seed = 9;
  const auto corpus = GenerateSynthetic(o);
  std::map<std::string, std::size_t> index;
  for (const auto& r : corpus)
    for (const auto* f : {&r.text.category, &r.text.query, &r.text.title, &r.text.description})
      for (const auto& w : *f) index.emplace(w, index.size());
  const std::size_t v = index.size(), d = o.dim;
  auto bow = [&](const DatasetRecord& r) {
    std::vector<double> x(v, 0.0);
    for (const auto* f : {&r.text.category, &r.text.query, &r.text.title, &r.text.description})
      for (const auto& w : *f) x[index.at(w)] += 1.0;
    return x;
  };
  auto mean_feature = [&](const DatasetRecord& r) {
    std::vector<double> y(d, 0.0);
    for (std::size_t t = 0; t < r.frames; ++t)
      for (std::size_t k = 0; k < d; ++k) y[k] += r.features[t * d + k] / r.frames;
    return y;
  };
  const std::size_t train = 90;
  std::vector<double> xtx(v * v, 0.0), xty(v * d, 0.0);
  for (std::size_t i = 0; i < train; ++i) {
    const auto x = bow(corpus[i]);
    const auto y = mean_feature(corpus[i]);
    for (std::size_t a = 0; a < v; ++a) {
      if (x[a] == 0) continue;
      for (std::size_t b = 0; b < v; ++b) xtx[a * v + b] += x[a] * x[b];
      for (std::size_t k = 0; k < d; ++k) xty[a * d + k] += x[a] * y[k];
    }
  }
  const auto w = RidgeSolve(xtx, xty, v, d, 1.0);
  auto predict = [&](const DatasetRecord& r) {
    const auto x = bow(r);
    std::vector<double> p(d, 0.0);
    for (std::size_t a = 0; a < v; ++a)
      for (std::size_t k = 0; k < d; ++k) p[k] += x[a] * w[a * d + k];
    return p;
  };
  std::size_t correct = 0, total = 0;
  for (std::size_t i = train; i < corpus.size(); ++i) {
    const auto p = predict(corpus[i]);
    const double own = Cosine(p, mean_feature(corpus[i]));
    for (std::size_t j = train; j < corpus.size(); ++j) {
      if (j == i) continue;
      correct += own > Cosine(p, mean_feature(corpus[j]));
      ++total;
    }
  }
  EXPECT_GE(static_cast<double>(correct) / total, 0.8);
}

}  // namespace
}  // namespace spvs
