#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "spvs/parameter_store.h"
#include "spvs/rng.h"
#include "spvs/tensor.h"

namespace spvs {

// Network sizes. Defaults are desk scale; full-size runs use
// frame_dim 1024, word_dim 768, heads 8 and a 4096-wide feed-forward layer.
struct EncoderConfig {
  std::size_t frame_dim = 64;
  std::size_t word_dim = 32;
  std::size_t video_layers = 3;
  std::size_t text_layers = 2;
  std::size_t heads = 4;
  // 0 selects 4 * width for each encoder.
  std::size_t ffn_dim = 0;
  std::size_t vocab_size = 64;
  std::size_t max_positions = 1024;
  double dropout = 0.1;
  // Number of per-stage score heads held by the model.
  std::size_t stages = 3;

  std::size_t VideoFfnDim() const { return ffn_dim ? ffn_dim : 4 * frame_dim; }
  std::size_t TextFfnDim() const { return ffn_dim ? ffn_dim : 4 * word_dim; }
  void Validate() const;
};

// Dropout is active only when rng is set and rate > 0.
struct ForwardOptions {
  double dropout = 0.0;
  Rng* rng = nullptr;
};

struct LinearWeights {
  Tensor weight;  // [in x out]
  Tensor bias;    // [out]
};

struct BlockWeights {
  Tensor ln1_gain, ln1_bias;
  LinearWeights query, key, value, output;
  Tensor ln2_gain, ln2_bias;
  LinearWeights ffn_in, ffn_out;
};

struct StageHead {
  Tensor weight;  // [frame_dim]
  Tensor bias;    // scalar
};

// Every trainable tensor of the system, registered in a ParameterStore under
// the canonical names listed in docs/NAMES.md. The video encoder is a single
// object shared by pretraining and all summarization stages.
class Model {
 public:
  Model(const EncoderConfig& config, std::uint64_t seed);

  Model(const Model&) = delete;
  Model& operator=(const Model&) = delete;
  Model(Model&&) = default;

  const EncoderConfig& config() const { return config_; }
  ParameterStore& store() { return store_; }
  const ParameterStore& store() const { return store_; }

  const std::vector<BlockWeights>& video_blocks() const { return video_blocks_; }
  const std::vector<BlockWeights>& text_blocks() const { return text_blocks_; }
  const BlockWeights& window_block() const { return window_block_; }
  const Tensor& cls_feature() const { return cls_feature_; }
  const Tensor& mask_token() const { return mask_token_; }
  const Tensor& word_embedding() const { return word_embedding_; }
  const Tensor& local_projection() const { return local_projection_; }
  const Tensor& global_projection() const { return global_projection_; }
  const std::vector<LinearWeights>& mlp_cls() const { return mlp_cls_; }
  const std::vector<LinearWeights>& mlp_text() const { return mlp_text_; }
  const std::vector<LinearWeights>& mlp_smooth() const { return mlp_smooth_; }
  const StageHead& stage_head(std::size_t stage) const;  // 1-based

  // Closed-form element count implied by a configuration.
  static std::size_t ExpectedParameterCount(const EncoderConfig& config);

 private:
  BlockWeights AddBlock(const std::string& prefix, std::size_t width, std::size_t ffn,
                        const Rng& rng);
  std::vector<LinearWeights> AddMlp(const std::string& prefix,
                                    const std::vector<std::size_t>& widths, const Rng& rng);

  EncoderConfig config_;
  ParameterStore store_;
  std::vector<BlockWeights> video_blocks_;
  std::vector<BlockWeights> text_blocks_;
  BlockWeights window_block_;
  Tensor cls_feature_, mask_token_, word_embedding_;
  Tensor local_projection_, global_projection_;
  std::vector<LinearWeights> mlp_cls_, mlp_text_, mlp_smooth_;
  std::vector<StageHead> heads_;
};

// Fixed sinusoidal table: row t, column 2i -> sin(t / 10000^(2i/d)),
// column 2i+1 -> cos(t / 10000^(2i/d)). Throws CapacityError when
// n > max_positions.
Tensor PositionalEncoding(std::size_t n, std::size_t width, std::size_t max_positions);

// Pre-LN transformer block: x + MHA(LN(x)), then h + FFN(LN(h)) with GELU.
// key_valid (optional) removes keys from every attention row.
Tensor TransformerBlock(const BlockWeights& block, std::size_t heads, const Tensor& x,
                        std::span<const std::uint8_t> key_valid, const ForwardOptions& options);

// frames [T x frame_dim]. Positions are added to the frame rows; when
// prepend_cls is set the learnable CLS feature becomes row 0 of the output.
Tensor EncodeVideo(const Model& model, const Tensor& frames, bool prepend_cls,
                   const ForwardOptions& options = {});

// Token ids with [CLS] first; [PAD] keys are masked out of attention.
Tensor EncodeText(const Model& model, std::span<const int> token_ids,
                  const ForwardOptions& options = {});

// MLP_cls on [g0, z0]: the pre-sigmoid logit (scalar).
Tensor CorrespondenceLogit(const Model& model, const Tensor& video_repr, const Tensor& text_repr);
// MLP_T: rows of width word_dim -> rows of width frame_dim (linear output).
Tensor MapTextToVisual(const Model& model, const Tensor& words);
// MLP_s: a frame_dim row -> smooth-transition probability (scalar).
Tensor SmoothProbability(const Model& model, const Tensor& encoded_frame);
// T_V: one transformer block over a [(2k+1) x frame_dim] window with positions.
Tensor EncodeWindow(const Model& model, const Tensor& window, const ForwardOptions& options = {});

Tensor ApplyLinear(const LinearWeights& layer, const Tensor& x);
// GELU between layers, none after the last.
Tensor ApplyMlp(std::span<const LinearWeights> layers, const Tensor& x);

}  // namespace spvs
