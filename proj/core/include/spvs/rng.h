#pragma once

#include <array>
#include <cstdint>
#include <string_view>
#include <vector>

namespace spvs {

// xoshiro256** seeded through splitmix64. Named sub-streams let independent
// stochastic choices (init, crops, masks, negatives) be drawn without
// disturbing each other when a configuration changes.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0);

  std::uint64_t seed() const { return seed_; }

  // Derives an independent generator from this generator's seed and a name.
  // Does not advance this generator.
  Rng Stream(std::string_view name) const;
  Rng Stream(std::string_view name, std::uint64_t index) const;

  std::uint64_t NextU64();
  // Uniform in [0, 1) with 53 bits of precision.
  double Uniform();
  double Uniform(double lo, double hi);
  // Uniform integer in [0, n). n must be positive.
  std::uint64_t UniformInt(std::uint64_t n);
  double Normal(double mean = 0.0, double stddev = 1.0);
  bool Bernoulli(double p);

  template <typename T>
  void Shuffle(std::vector<T>& values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(UniformInt(i));
      std::swap(values[i - 1], values[j]);
    }
  }

 private:
  std::uint64_t seed_;
  std::array<std::uint64_t, 4> state_{};
};

std::uint64_t HashName(std::string_view name);

}  // namespace spvs
