#include "spvs/encoders.h"

#include <algorithm>
#include <cmath>

#include "spvs/errors.h"
#include "spvs/ops.h"
#include "spvs/tokens.h"

namespace spvs {
namespace {

// Uniform(-sqrt(3), sqrt(3)) has unit variance.
constexpr double kFeatureInitBound = 1.7320508075688772;

std::size_t Half(std::size_t d) { return std::max<std::size_t>(1, d / 2); }
std::size_t Quarter(std::size_t d) { return std::max<std::size_t>(1, d / 4); }

std::size_t BlockParameterCount(std::size_t d, std::size_t f) {
  return 4 * d * d + 2 * d * f + 9 * d + f;
}

std::size_t MlpParameterCount(const std::vector<std::size_t>& widths) {
  std::size_t n = 0;
  for (std::size_t i = 0; i + 1 < widths.size(); ++i) n += widths[i] * widths[i + 1] + widths[i + 1];
  return n;
}

std::vector<std::size_t> MlpClsWidths(const EncoderConfig& c) {
  return {c.frame_dim + c.word_dim, c.frame_dim, Half(c.frame_dim), 1};
}
std::vector<std::size_t> MlpTextWidths(const EncoderConfig& c) {
  return {c.word_dim, c.frame_dim, c.frame_dim};
}
std::vector<std::size_t> MlpSmoothWidths(const EncoderConfig& c) {
  return {c.frame_dim, Quarter(c.frame_dim), 1};
}

Tensor AsRow(const Tensor& x) {
  if (x.rank() == 2) return x;
  return Reshape(x, {1, x.numel()});
}

}  // namespace

void EncoderConfig::Validate() const {
  auto positive = [](std::size_t v, const char* name) {
    if (v == 0) throw ConfigError(std::string("encoder.") + name + " must be >= 1");
  };
  positive(frame_dim, "frame_dim");
  positive(word_dim, "word_dim");
  positive(heads, "heads");
  positive(vocab_size, "vocab_size");
  positive(max_positions, "max_positions");
  positive(stages, "stages");
  if (frame_dim % heads != 0 || word_dim % heads != 0) {
    throw ConfigError("encoder.heads (" + std::to_string(heads) +
                      ") must divide frame_dim and word_dim");
  }
  if (vocab_size <= static_cast<std::size_t>(kReservedTokens)) {
    throw ConfigError("encoder.vocab_size must exceed the reserved token count");
  }
  if (dropout < 0 || dropout >= 1) throw ConfigError("encoder.dropout must be in [0, 1)");
}

Model::Model(const EncoderConfig& config, std::uint64_t seed) : config_(config) {
  config_.Validate();
  const Rng rng(seed);
  const std::size_t df = config_.frame_dim, dw = config_.word_dim;

  for (std::size_t i = 0; i < config_.video_layers; ++i) {
    video_blocks_.push_back(
        AddBlock("ev.layer" + std::to_string(i), df, config_.VideoFfnDim(), rng));
  }
  // Feature-space vectors (CLS, mask token, word embeddings) start at unit
  // variance so they are on the scale of frames and positions.
  cls_feature_ = store_.AddUniformBounded("ev.cls", {df}, kFeatureInitBound, rng);

  word_embedding_ =
      store_.AddUniformBounded("et.embed", {config_.vocab_size, dw}, kFeatureInitBound, rng);
  for (std::size_t i = 0; i < config_.text_layers; ++i) {
    text_blocks_.push_back(
        AddBlock("et.layer" + std::to_string(i), dw, config_.TextFfnDim(), rng));
  }

  window_block_ = AddBlock("tv.layer0", df, config_.VideoFfnDim(), rng);
  mask_token_ = store_.AddUniformBounded("ssl.mask", {df}, kFeatureInitBound, rng);
  local_projection_ = store_.AddUniform("ssl.w1", {df, df}, rng);
  global_projection_ = store_.AddUniform("ssl.w2", {df, df}, rng);

  mlp_cls_ = AddMlp("mlp_cls", MlpClsWidths(config_), rng);
  mlp_text_ = AddMlp("mlp_t", MlpTextWidths(config_), rng);
  mlp_smooth_ = AddMlp("mlp_s", MlpSmoothWidths(config_), rng);

  for (std::size_t n = 1; n <= config_.stages; ++n) {
    const std::string prefix = "head.stage" + std::to_string(n);
    StageHead head;
    head.weight = store_.AddUniform(prefix + ".w", {df}, rng);
    head.bias = store_.AddConstant(prefix + ".b", {}, 0.0);
    heads_.push_back(head);
  }
}

BlockWeights Model::AddBlock(const std::string& prefix, std::size_t width, std::size_t ffn,
                             const Rng& rng) {
  BlockWeights b;
  auto linear = [&](const std::string& name, std::size_t in, std::size_t out,
                    const std::string& wname, const std::string& bname) {
    LinearWeights l;
    l.weight = store_.AddUniform(prefix + name + wname, {in, out}, rng);
    l.bias = store_.AddConstant(prefix + name + bname, {out}, 0.0);
    return l;
  };
  b.ln1_gain = store_.AddConstant(prefix + ".ln1.gain", {width}, 1.0);
  b.ln1_bias = store_.AddConstant(prefix + ".ln1.bias", {width}, 0.0);
  b.query = linear(".attn", width, width, ".wq", ".bq");
  b.key = linear(".attn", width, width, ".wk", ".bk");
  b.value = linear(".attn", width, width, ".wv", ".bv");
  b.output = linear(".attn", width, width, ".wo", ".bo");
  b.ln2_gain = store_.AddConstant(prefix + ".ln2.gain", {width}, 1.0);
  b.ln2_bias = store_.AddConstant(prefix + ".ln2.bias", {width}, 0.0);
  b.ffn_in = linear(".ffn", width, ffn, ".w1", ".b1");
  b.ffn_out = linear(".ffn", ffn, width, ".w2", ".b2");
  return b;
}

std::vector<LinearWeights> Model::AddMlp(const std::string& prefix,
                                         const std::vector<std::size_t>& widths, const Rng& rng) {
  std::vector<LinearWeights> layers;
  for (std::size_t i = 0; i + 1 < widths.size(); ++i) {
    const std::string name = prefix + ".l" + std::to_string(i);
    LinearWeights l;
    l.weight = store_.AddUniform(name + ".w", {widths[i], widths[i + 1]}, rng);
    l.bias = store_.AddConstant(name + ".b", {widths[i + 1]}, 0.0);
    layers.push_back(l);
  }
  return layers;
}

const StageHead& Model::stage_head(std::size_t stage) const {
  if (stage < 1 || stage > heads_.size()) {
    throw ContractError("stage " + std::to_string(stage) + " outside 1.." +
                        std::to_string(heads_.size()));
  }
  return heads_[stage - 1];
}

std::size_t Model::ExpectedParameterCount(const EncoderConfig& c) {
  const std::size_t df = c.frame_dim, dw = c.word_dim;
  return c.video_layers * BlockParameterCount(df, c.VideoFfnDim()) + df +
         c.vocab_size * dw + c.text_layers * BlockParameterCount(dw, c.TextFfnDim()) +
         BlockParameterCount(df, c.VideoFfnDim()) + df + 2 * df * df +
         MlpParameterCount(MlpClsWidths(c)) + MlpParameterCount(MlpTextWidths(c)) +
         MlpParameterCount(MlpSmoothWidths(c)) + c.stages * (df + 1);
}

Tensor PositionalEncoding(std::size_t n, std::size_t width, std::size_t max_positions) {
  if (n > max_positions) {
    throw CapacityError("sequence of length " + std::to_string(n) +
                        " exceeds max_positions " + std::to_string(max_positions) +
                        "; split the video into windows");
  }
  std::vector<double> table(n * width);
  for (std::size_t t = 0; t < n; ++t) {
    for (std::size_t j = 0; j < width; ++j) {
      const double pair = static_cast<double>(j / 2 * 2);
      const double angle =
          static_cast<double>(t) / std::pow(10000.0, pair / static_cast<double>(width));
      table[t * width + j] = (j % 2 == 0) ? std::sin(angle) : std::cos(angle);
    }
  }
  return Tensor::FromData({n, width}, std::move(table));
}

Tensor ApplyLinear(const LinearWeights& layer, const Tensor& x) {
  return AddRowVector(MatMul(AsRow(x), layer.weight), layer.bias);
}

Tensor ApplyMlp(std::span<const LinearWeights> layers, const Tensor& x) {
  Tensor h = AsRow(x);
  for (std::size_t i = 0; i < layers.size(); ++i) {
    if (h.cols() != layers[i].weight.shape()[0]) {
      throw DimensionError("mlp layer " + std::to_string(i) + " expects width " +
                           std::to_string(layers[i].weight.shape()[0]) + ", got " +
                           std::to_string(h.cols()));
    }
    h = ApplyLinear(layers[i], h);
    if (i + 1 < layers.size()) h = Gelu(h);
  }
  return h;
}

Tensor TransformerBlock(const BlockWeights& block, std::size_t heads, const Tensor& x,
                        std::span<const std::uint8_t> key_valid, const ForwardOptions& options) {
  const std::size_t width = x.cols();
  const std::size_t head_dim = width / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(head_dim));
  const bool dropout = options.rng != nullptr && options.dropout > 0;

  const Tensor normed = LayerNormRows(x, block.ln1_gain, block.ln1_bias);
  const Tensor q = ApplyLinear(block.query, normed);
  const Tensor k = ApplyLinear(block.key, normed);
  const Tensor v = ApplyLinear(block.value, normed);
  std::vector<Tensor> head_out;
  head_out.reserve(heads);
  for (std::size_t h = 0; h < heads; ++h) {
    const std::size_t c0 = h * head_dim;
    const Tensor qh = heads == 1 ? q : SliceCols(q, c0, head_dim);
    const Tensor kh = heads == 1 ? k : SliceCols(k, c0, head_dim);
    const Tensor vh = heads == 1 ? v : SliceCols(v, c0, head_dim);
    const Tensor attn = SoftmaxRows(Scale(MatMul(qh, Transpose(kh)), scale), key_valid);
    head_out.push_back(MatMul(attn, vh));
  }
  Tensor mixed = heads == 1 ? head_out[0] : ConcatCols(head_out);
  mixed = ApplyLinear(block.output, mixed);
  if (dropout) mixed = Dropout(mixed, options.dropout, *options.rng);
  const Tensor h1 = Add(x, mixed);

  Tensor ff = ApplyLinear(block.ffn_in, LayerNormRows(h1, block.ln2_gain, block.ln2_bias));
  ff = ApplyLinear(block.ffn_out, Gelu(ff));
  if (dropout) ff = Dropout(ff, options.dropout, *options.rng);
  return Add(h1, ff);
}

Tensor EncodeVideo(const Model& model, const Tensor& frames, bool prepend_cls,
                   const ForwardOptions& options) {
  const EncoderConfig& c = model.config();
  if (frames.rank() != 2 || frames.cols() != c.frame_dim) {
    throw DimensionError("encode_video: frames of shape " + ShapeToString(frames.shape()) +
                         " do not match frame_dim " + std::to_string(c.frame_dim));
  }
  const std::size_t t = frames.rows();
  const std::size_t total = t + (prepend_cls ? 1 : 0);
  if (total > c.max_positions) {
    throw CapacityError("video of " + std::to_string(t) + " frames exceeds max_positions " +
                        std::to_string(c.max_positions) + "; split it into windows");
  }
  Tensor x = Add(frames, PositionalEncoding(t, c.frame_dim, c.max_positions));
  if (prepend_cls) {
    const Tensor parts[] = {Reshape(model.cls_feature(), {1, c.frame_dim}), x};
    x = ConcatRows(parts);
  }
  for (const BlockWeights& block : model.video_blocks()) {
    x = TransformerBlock(block, c.heads, x, {}, options);
  }
  return x;
}

Tensor EncodeText(const Model& model, std::span<const int> token_ids,
                  const ForwardOptions& options) {
  const EncoderConfig& c = model.config();
  if (token_ids.empty()) throw DimensionError("encode_text: empty token sequence");
  if (token_ids.size() > c.max_positions) {
    throw CapacityError("text of " + std::to_string(token_ids.size()) +
                        " tokens exceeds max_positions");
  }
  std::vector<std::uint8_t> valid(token_ids.size());
  for (std::size_t i = 0; i < token_ids.size(); ++i) {
    if (token_ids[i] < 0 || static_cast<std::size_t>(token_ids[i]) >= c.vocab_size) {
      throw VocabularyError("token id " + std::to_string(token_ids[i]) +
                            " outside vocabulary of size " + std::to_string(c.vocab_size));
    }
    valid[i] = token_ids[i] != kPadId;
  }
  Tensor x = Add(GatherRows(model.word_embedding(), token_ids),
                 PositionalEncoding(token_ids.size(), c.word_dim, c.max_positions));
  for (const BlockWeights& block : model.text_blocks()) {
    x = TransformerBlock(block, c.heads, x, valid, options);
  }
  return x;
}

Tensor CorrespondenceLogit(const Model& model, const Tensor& video_repr, const Tensor& text_repr) {
  const Tensor parts[] = {AsRow(video_repr), AsRow(text_repr)};
  return Reshape(ApplyMlp(model.mlp_cls(), ConcatCols(parts)), {});
}

Tensor MapTextToVisual(const Model& model, const Tensor& words) {
  return ApplyMlp(model.mlp_text(), words);
}

Tensor SmoothProbability(const Model& model, const Tensor& encoded_frame) {
  return Reshape(Sigmoid(ApplyMlp(model.mlp_smooth(), encoded_frame)), {});
}

Tensor EncodeWindow(const Model& model, const Tensor& window, const ForwardOptions& options) {
  const EncoderConfig& c = model.config();
  if (window.rank() != 2 || window.cols() != c.frame_dim) {
    throw DimensionError("encode_window: window of shape " + ShapeToString(window.shape()));
  }
  const Tensor x = Add(window, PositionalEncoding(window.rows(), c.frame_dim, c.max_positions));
  return TransformerBlock(model.window_block(), c.heads, x, {}, options);
}

}  // namespace spvs
