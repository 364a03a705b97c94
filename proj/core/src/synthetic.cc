#include "spvs/synthetic.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "spvs/errors.h"
#include "spvs/rng.h"
#include "spvs/text.h"

namespace spvs {

void SyntheticOptions::Validate() const {
  if (videos == 0) throw ConfigError("gen-synth: at least one video is required");
  if (frames < 16) throw ConfigError("gen-synth: frames must be at least 16");
  if (dim == 0) throw ConfigError("gen-synth: dim must be positive");
  if (vocab < 20) throw ConfigError("gen-synth: vocab must be at least 20");
  if (topics < 2) throw ConfigError("gen-synth: at least two topics are required");
  if (vocab < 2 * (topics + 1)) throw ConfigError("gen-synth: vocab too small for topic count");
  if (annotators == 0) throw ConfigError("gen-synth: at least one annotator is required");
  if (!(fps > 0)) throw ConfigError("gen-synth: fps must be positive");
  if (feature_noise < 0 || annotator_noise < 0) throw ConfigError("gen-synth: negative noise");
}

std::vector<std::string> SyntheticWords(std::size_t count, std::uint64_t seed) {
  static constexpr char kConsonants[] = "bdfgklmnprtvz";
  static constexpr char kVowels[] = "aeiou";
  Rng rng = Rng(seed).Stream("words");
  std::set<std::string> seen;
  std::vector<std::string> words;
  while (words.size() < count) {
    const std::size_t syllables = 2 + static_cast<std::size_t>(rng.UniformInt(2));
    std::string w;
    for (std::size_t s = 0; s < syllables; ++s) {
      w.push_back(kConsonants[rng.UniformInt(sizeof(kConsonants) - 1)]);
      w.push_back(kVowels[rng.UniformInt(sizeof(kVowels) - 1)]);
    }
    if (seen.contains(w)) continue;
    const std::vector<std::string> cleaned = CleanText(w);
    if (cleaned.size() != 1 || cleaned[0] != w) continue;
    seen.insert(w);
    words.push_back(w);
  }
  return words;
}

namespace {

constexpr std::size_t kMinSegment = 5;

struct Topic {
  std::vector<double> prototype;
  std::vector<std::string> words;
  double interest = 0;
};

const std::string& Pick(const std::vector<std::string>& words, Rng& rng) {
  return words[rng.UniformInt(words.size())];
}

}  // namespace

std::vector<DatasetRecord> GenerateSynthetic(const SyntheticOptions& options) {
  options.Validate();
  const Rng root(options.seed);
  const std::vector<std::string> words = SyntheticWords(options.vocab, options.seed);

  const std::size_t filler_count = options.vocab / (options.topics + 1);
  const std::size_t per_topic = (options.vocab - filler_count) / options.topics;
  std::vector<Topic> topics(options.topics);
  Rng topic_rng = root.Stream("topics");
  for (std::size_t k = 0; k < options.topics; ++k) {
    Topic& t = topics[k];
    t.prototype.resize(options.dim);
    for (double& v : t.prototype) v = topic_rng.Normal();
    t.words.assign(words.begin() + static_cast<std::ptrdiff_t>(k * per_topic),
                   words.begin() + static_cast<std::ptrdiff_t>((k + 1) * per_topic));
    t.interest = topic_rng.Uniform();
  }
  const std::vector<std::string> filler(
      words.begin() + static_cast<std::ptrdiff_t>(options.topics * per_topic), words.end());

  const std::int64_t stride =
      options.fps < 2 ? 1 : std::max<std::int64_t>(1, std::llround(options.fps / 2.0));
  const std::size_t t_len = options.frames;

  std::vector<DatasetRecord> records;
  records.reserve(options.videos);
  for (std::size_t v = 0; v < options.videos; ++v) {
    Rng rng = root.Stream("video", v);
    DatasetRecord r;
    char id[32];
    std::snprintf(id, sizeof(id), "synth_%04zu", v);
    r.id = id;
    r.frames = t_len;
    r.dim = options.dim;
    r.fps_original = options.fps;

    // Segment layout: 3-8 segments of at least kMinSegment frames, so the
    // 5-frame smoothing window still reaches each segment's score at its centre.
    const std::size_t segments = std::min<std::size_t>(
        3 + static_cast<std::size_t>(rng.UniformInt(6)), t_len / kMinSegment);
    std::vector<double> weight(segments);
    double weight_sum = 0;
    for (double& w : weight) weight_sum += (w = rng.Uniform(0.5, 1.5));
    const std::size_t spare = t_len - kMinSegment * segments;
    std::vector<std::size_t> length(segments);
    std::size_t used = 0;
    for (std::size_t s = 0; s < segments; ++s) {
      length[s] = kMinSegment + static_cast<std::size_t>(std::floor(spare * weight[s] / weight_sum));
      used += length[s];
    }
    length.back() += t_len - used;

    const std::size_t primary = static_cast<std::size_t>(rng.UniformInt(options.topics));
    std::vector<std::size_t> order(segments);
    for (std::size_t s = 0; s < segments; ++s) order[s] = s;
    rng.Shuffle(order);
    std::vector<std::size_t> topic_of(segments);
    const std::size_t primary_segments = (segments + 1) / 2;
    for (std::size_t j = 0; j < segments; ++j) {
      std::size_t k = primary;
      if (j >= primary_segments) {
        k = static_cast<std::size_t>(rng.UniformInt(options.topics - 1));
        if (k >= primary) ++k;
      }
      topic_of[order[j]] = k;
    }

    std::vector<double> raw(segments);
    for (std::size_t s = 0; s < segments; ++s) {
      raw[s] = topics[topic_of[s]].interest + (topic_of[s] == primary ? 0.6 : 0.0) +
               rng.Uniform(-0.05, 0.05);
    }
    const auto [lo_it, hi_it] = std::minmax_element(raw.begin(), raw.end());
    const double lo = *lo_it, span = std::max(*hi_it - *lo_it, 1e-9);
    std::vector<double> segment_score(segments);
    for (std::size_t s = 0; s < segments; ++s) segment_score[s] = 0.1 + 0.8 * (raw[s] - lo) / span;

    std::vector<std::size_t> frame_topic(t_len);
    std::vector<double> step(t_len);
    for (std::size_t s = 0, t = 0; s < segments; ++s) {
      for (std::size_t j = 0; j < length[s]; ++j, ++t) {
        frame_topic[t] = topic_of[s];
        step[t] = segment_score[s];
      }
    }
    r.planted.resize(t_len);
    for (std::size_t t = 0; t < t_len; ++t) {
      const std::size_t a = t >= 2 ? t - 2 : 0, b = std::min(t_len, t + 3);
      double sum = 0;
      for (std::size_t j = a; j < b; ++j) sum += step[j];
      r.planted[t] = sum / static_cast<double>(b - a);
    }

    r.features.resize(t_len * options.dim);
    for (std::size_t t = 0; t < t_len; ++t) {
      const std::vector<double>& proto = topics[frame_topic[t]].prototype;
      for (std::size_t d = 0; d < options.dim; ++d) {
        r.features[t * options.dim + d] =
            static_cast<float>(proto[d] + rng.Normal(0.0, options.feature_noise));
      }
    }

    r.picks.resize(t_len);
    for (std::size_t t = 0; t < t_len; ++t) r.picks[t] = static_cast<std::int64_t>(t) * stride;
    r.original_frames = static_cast<std::int64_t>(t_len) * stride;

    const Topic& main = topics[primary];
    r.text.category.push_back(main.words[0]);
    for (int i = 0; i < 2; ++i) r.text.query.push_back(Pick(main.words, rng));
    for (int i = 0; i < 6; ++i) {
      const std::size_t k = rng.Bernoulli(0.7) ? primary : frame_topic[rng.UniformInt(t_len)];
      r.text.title.push_back(Pick(topics[k].words, rng));
    }
    for (int i = 0; i < 30; ++i) {
      if (!filler.empty() && rng.Bernoulli(0.2)) {
        r.text.description.push_back(Pick(filler, rng));
      } else {
        r.text.description.push_back(Pick(topics[frame_topic[rng.UniformInt(t_len)]].words, rng));
      }
    }

    for (std::size_t a = 0; a < options.annotators; ++a) {
      std::vector<double> ann(t_len);
      for (std::size_t t = 0; t < t_len; ++t) {
        ann[t] = std::clamp(r.planted[t] + rng.Normal(0.0, options.annotator_noise), 0.0, 1.0);
      }
      r.annotations.push_back(std::move(ann));
    }
    records.push_back(std::move(r));
  }
  return records;
}

}  // namespace spvs
