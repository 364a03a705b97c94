#pragma once

#include <cstdint>
#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "spvs/adam.h"
#include "spvs/dataset.h"
#include "spvs/encoders.h"
#include "spvs/rng.h"
#include "spvs/text.h"

namespace spvs {

struct SslConfig {
  double margin = std::numbers::sqrt2;
  std::size_t window_radius = 4;
  double alpha = 1.0;
  double beta = 5.0;
  std::size_t crop_length = 256;
  double negative_probability = 0.5;
  double learning_rate = 1e-6;
  std::size_t batch_size = 8;
  // When false each video keeps the crop drawn the first time it is used.
  bool recrop_each_epoch = true;
  // Excludes the text encoder and word embeddings from the update.
  bool freeze_text_encoder = false;
  // Keeps only et.embed fixed, e.g. when it was loaded from an external table.
  bool freeze_word_embedding = false;

  void Validate() const;
};

struct SslVideo {
  std::string id;
  Tensor frames;  // T x frame_dim
  TokenSequence tokens;
};

using SslCorpus = std::vector<SslVideo>;

SslCorpus BuildSslCorpus(const std::vector<DatasetRecord>& records, const Vocabulary& vocab,
                         TextMode mode = TextMode::kPretrain);

struct PairSample {
  std::size_t video_index = 0;
  std::size_t text_index = 0;
  Tensor frames;  // cropped
  TokenSequence tokens;
  int label = 1;  // 0 exactly when the text came from another video
  std::size_t crop_begin = 0;
};

// Pairs video `video_index` with its own text, or with probability
// negative_probability with the text of a uniformly chosen other video,
// and crops crop_length frames at a random offset (whole video if shorter).
PairSample SamplePair(const SslCorpus& corpus, std::size_t video_index, const SslConfig& config,
                      Rng& rng, std::optional<std::size_t> fixed_crop_begin = std::nullopt);
// Draws the video uniformly.
PairSample SamplePair(const SslCorpus& corpus, const SslConfig& config, Rng& rng);

// Probabilities are clamped to [1e-7, 1 - 1e-7] before the logarithms.
inline constexpr double kProbabilityClamp = 1e-7;
Tensor BinaryCrossEntropy(const Tensor& probability, int label);

struct CoarseResult {
  Tensor loss;
  Tensor probability;  // p_c
};
CoarseResult CoarseLoss(const Model& model, const Tensor& video_repr, const Tensor& text_repr,
                        int label);

struct HausdorffResult {
  Tensor distance;  // scalar, differentiable through the selected pair
  std::size_t frame_index = 0;
  std::size_t word_index = 0;
};

// Symmetric Hausdorff distance between the L2-normalized rows of frames and
// mapped_words (both width frame_dim). Gradients flow through the pair that
// realizes the max-min only.
HausdorffResult HausdorffDistance(const Tensor& frames, const Tensor& mapped_words);

// y * d^2 + (1 - y) * max(0, margin - d^2)
Tensor FineLoss(const Tensor& distance, int label, double margin);

struct MaskedFrames {
  Tensor frames;    // row `index` replaced by the mask token
  std::size_t index = 0;
  Tensor original;  // [frame_dim] target
};
MaskedFrames MaskFrame(const Tensor& frames, const Tensor& mask_token, Rng& rng);
MaskedFrames MaskFrameAt(const Tensor& frames, const Tensor& mask_token, std::size_t index);

struct Recovery {
  Tensor recovered;  // [frame_dim]
  Tensor smooth_probability;
  Tensor local;   // W1-projected window feature
  Tensor global;  // W2-projected encoded frame
};

// encoded_with_cls is E_V of the masked frames with CLS prepended, so the
// masked frame's encoding is row index + 1. The window spans index +- radius
// with zero rows outside the video.
Recovery RecoverFrame(const Model& model, const Tensor& masked_frames,
                      const Tensor& encoded_with_cls, std::size_t index, std::size_t radius,
                      const ForwardOptions& options = {},
                      std::optional<double> forced_probability = std::nullopt);

// (1/d) * ||recovered - target||^2
Tensor RecoveryLoss(const Tensor& recovered, const Tensor& target);

struct SslTerms {
  double coarse = 0;
  double fine = 0;
  double recovery = 0;
  double total = 0;
  double accuracy = 0;  // fraction of p_c on the right side of 0.5
};

struct SslItemResult {
  Tensor loss;  // L1 + alpha L2 + beta L3
  SslTerms terms;
};

// Full forward pass for one pair with a given masked position.
SslItemResult SslForward(const Model& model, const PairSample& sample, std::size_t mask_index,
                         const SslConfig& config, const ForwardOptions& options = {});

struct SslStepReport {
  std::int64_t step = 0;
  SslTerms terms;  // batch means
};

// Holds the optimizer state for pretraining one model.
class Pretrainer {
 public:
  Pretrainer(Model& model, SslConfig config, std::uint64_t seed);

  // One optimizer step on the batch: per-item gradients are computed
  // independently and averaged in index order.
  SslStepReport Step(const std::vector<PairSample>& batch);

  // Draws the next batch from the epoch order, reshuffling at epoch ends.
  std::vector<PairSample> NextBatch(const SslCorpus& corpus);

  std::int64_t steps() const { return optimizer_.steps(); }
  const std::vector<Tensor>& trainable() const { return params_; }

 private:
  Model& model_;
  SslConfig config_;
  Rng rng_;
  Adam optimizer_;
  std::vector<Tensor> params_;
  std::vector<std::size_t> epoch_order_;
  std::size_t epoch_pos_ = 0;
  std::uint64_t epoch_ = 0;
  std::vector<std::optional<std::size_t>> fixed_crops_;
};

struct PretrainOptions {
  std::size_t steps = 2000;
  std::uint64_t seed = 7;
  std::size_t log_every = 1;
  std::function<void(const SslStepReport&)> on_step;
};

std::vector<SslStepReport> Pretrain(Model& model, const SslCorpus& corpus, const SslConfig& config,
                                    const PretrainOptions& options);

struct SslEvaluation {
  double correspondence_accuracy = 0;
  double recovery_loss = 0;
  double mean_baseline_loss = 0;  // predicting the mean of the unmasked frames
  std::size_t pairs = 0;
};

// Deterministic held-out evaluation: each video is scored with its own text
// and with one other video's text, and has one frame masked.
SslEvaluation EvaluateSsl(const Model& model, const SslCorpus& corpus, const SslConfig& config,
                          std::uint64_t seed);

}  // namespace spvs
