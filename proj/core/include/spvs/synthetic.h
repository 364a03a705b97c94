#pragma once

#include <cstdint>
#include <vector>

#include "spvs/dataset.h"

namespace spvs {

struct SyntheticOptions {
  std::size_t videos = 50;
  std::size_t frames = 128;  // per video, at 2 FPS
  std::size_t dim = 64;
  // Distinct words across all topics plus shared filler words; at least 20.
  std::size_t vocab = 240;
  std::size_t topics = 12;
  std::size_t annotators = 3;
  double fps = 30.0;
  double feature_noise = 0.5;
  double annotator_noise = 0.1;
  std::uint64_t seed = 7;

  void Validate() const;
};

// Planted-importance corpus. Each video is cut into 3-8 segments; every
// segment shows one topic (prototype vector plus Gaussian noise), and the
// video's primary topic covers at least half of the segments. A segment's
// importance comes from its topic's interest plus a bonus when it is the
// primary topic, rescaled to [0.1, 0.9] per video and smoothed across
// boundaries. Text fields are drawn from the words of the video's topics.
std::vector<DatasetRecord> GenerateSynthetic(const SyntheticOptions& options);

// Syllable words that the text cleaner leaves unchanged.
std::vector<std::string> SyntheticWords(std::size_t count, std::uint64_t seed);

}  // namespace spvs
