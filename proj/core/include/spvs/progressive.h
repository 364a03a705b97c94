#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "spvs/adam.h"
#include "spvs/checkpoint.h"
#include "spvs/dataset.h"
#include "spvs/encoders.h"
#include "spvs/evaluation.h"
#include "spvs/text.h"

namespace spvs {

inline constexpr std::size_t kMaxStages = 4;

struct SummarizerConfig {
  std::size_t stages = 3;
  bool use_text = false;
  std::size_t max_frames = 512;
  double learning_rate = 1e-5;
  std::size_t epochs = 40;
  std::size_t batch_size = 4;
  std::size_t folds = 5;
  bool recrop_each_epoch = true;
  // Keeps et.embed fixed, e.g. when it was loaded from an external table.
  bool freeze_word_embedding = false;

  void Validate() const;
};

// F^n = F^{n-1} * s^{n-1} + F^{n-1}: row t scaled by 1 + s_t.
Tensor RefineInput(const Tensor& previous, const Tensor& previous_scores);

struct StageOutput {
  Tensor input;    // F^n
  Tensor encoded;  // G^n
  Tensor scores;   // s^n, [T]
};

// text_feature is MLP_T(z0) as a [1 x frame_dim] row, allowed only at stage 1.
StageOutput StageForward(const Model& model, const Tensor& input, std::size_t stage,
                         const Tensor* text_feature, const ForwardOptions& options = {});

// MLP_T applied to the [CLS] encoding of the text.
Tensor TextFeature(const Model& model, const TokenSequence& tokens,
                   const ForwardOptions& options = {});

// Elementwise product of the stage scores.
Tensor FinalScores(std::span<const Tensor> stage_scores);

// (1/valid) * sum over the first `valid_length` positions of (s* - s_gt)^2.
// valid_length 0 means the full length.
Tensor VsLoss(const Tensor& final_scores, std::span<const double> target,
              std::size_t valid_length = 0);

struct ForwardResult {
  std::vector<StageOutput> stages;
  Tensor final_scores;
};

// Differentiable pass through `stages` stages. tokens may be null.
ForwardResult SummarizerForward(const Model& model, const Tensor& frames, std::size_t stages,
                                const TokenSequence* tokens, const ForwardOptions& options = {});

struct ScorePrediction {
  std::vector<std::vector<double>> stage_scores;
  std::vector<double> final_scores;
};

// Inference without dropout or graph recording. Throws CapacityError when the
// video is longer than the positional table.
ScorePrediction Predict(const Model& model, const Tensor& frames, std::size_t stages,
                        const TokenSequence* tokens = nullptr);

struct SummaryExample {
  std::string id;
  Tensor frames;
  std::vector<double> target;  // per-frame ground truth in [0, 1]
  TokenSequence tokens;        // empty when text is unused
};

// Builds training examples from annotated records. Throws DataError naming the
// video when a record has no annotations or mismatched lengths.
std::vector<SummaryExample> BuildExamples(const std::vector<DatasetRecord>& records,
                                          const Vocabulary* vocab);

struct EpochReport {
  std::size_t epoch = 0;
  double loss = 0;  // mean L_VS over the epoch's items
};

// Holds optimizer state for fitting one model's stage heads and shared
// encoder (plus the text path when enabled) to frame scores.
class SummarizerTrainer {
 public:
  SummarizerTrainer(Model& model, SummarizerConfig config, std::uint64_t seed);

  EpochReport RunEpoch(const std::vector<SummaryExample>& examples);
  // One Adam step on the given items (already cropped).
  double Step(const std::vector<const SummaryExample*>& batch,
              const std::vector<std::size_t>& crop_begin);

  const std::vector<std::string>& trainable_names() const { return names_; }

 private:
  Model& model_;
  SummarizerConfig config_;
  Rng rng_;
  Adam optimizer_;
  std::vector<std::string> names_;
  std::vector<Tensor> params_;
  std::size_t epoch_ = 0;
  std::vector<std::optional<std::size_t>> fixed_crops_;
};

// Deterministic fold index per video: videos are ordered by a hash of (seed,
// id) and dealt round-robin, so the folds partition the corpus.
std::vector<std::size_t> AssignFolds(const std::vector<std::string>& ids, std::size_t folds,
                                     std::uint64_t seed);

struct VideoScores {
  std::string id;
  std::size_t fold = 0;
  ScorePrediction prediction;
  std::vector<std::int64_t> picks;
};

struct CrossValidationOptions {
  std::uint64_t seed = 7;
  // Encoder weights copied into every fold's model before training; stage
  // heads are never loaded.
  const std::vector<NamedArray>* pretrained = nullptr;
  EvaluationOptions evaluation;
  std::function<void(std::size_t fold, const EpochReport&)> on_epoch;
  std::function<void(std::size_t fold, const Model&)> on_fold_model;
};

struct CrossValidationResult {
  std::vector<VideoScores> scores;  // out-of-fold, in corpus order
  std::vector<RecordEvaluation> evaluations;
  EvaluationReport report;
};

// k-fold cross-validation: one model per fold, trained on the other folds and
// scored on its own.
CrossValidationResult CrossValidate(const std::vector<DatasetRecord>& records,
                                    const Vocabulary* vocab, const EncoderConfig& encoder,
                                    const SummarizerConfig& config,
                                    const CrossValidationOptions& options);

// Names whose values are taken from a pretrained checkpoint.
bool IsPretrainedParameter(const std::string& name);

}  // namespace spvs
