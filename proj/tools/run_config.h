#pragma once

#include <cstdint>
#include <string>

#include "spvs/encoders.h"
#include "spvs/evaluation.h"
#include "spvs/progressive.h"
#include "spvs/ssl.h"

namespace spvs::cli {

// Published settings targeted far larger features and corpora; the desk
// defaults below are what the command-line tool uses unless overridden.
inline constexpr double kDeskSslLearningRate = 2e-3;
inline constexpr double kDeskSummarizerLearningRate = 5e-4;
inline constexpr std::size_t kDeskSslSteps = 2000;
inline constexpr std::size_t kDeskWordDim = 64;
inline constexpr std::size_t kDeskVideoLayers = 2;
inline constexpr std::size_t kDeskTextLayers = 1;

struct RunConfig {
  std::uint64_t seed = 7;
  // frame_dim and vocab_size are taken from the data and vocabulary.
  EncoderConfig encoder;
  SslConfig ssl;
  std::size_t ssl_steps = kDeskSslSteps;
  std::size_t checkpoint_every = 0;  // 0 = only the final checkpoint
  SummarizerConfig summarizer;
  EvaluationOptions evaluation;
};

RunConfig DeskDefaults();

// Overlays a JSON config of the shape
//   {"seed", "encoder": {...}, "ssl": {...}, "summarizer": {...}, "evaluation": {...}}.
// Unknown keys and wrongly typed values raise ConfigError naming the key.
void ApplyConfigJson(RunConfig& config, const std::string& text, const std::string& origin);
void ApplyConfigFile(RunConfig& config, const std::string& path);

}  // namespace spvs::cli
