#include "spvs/ssl.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "spvs/errors.h"
#include "spvs/gradients.h"
#include "spvs/ops.h"
#include "spvs/parallel.h"

namespace spvs {

void SslConfig::Validate() const {
  if (!(margin > 0)) throw ConfigError("ssl.margin must be positive");
  if (alpha < 0 || beta < 0) throw ConfigError("ssl.alpha and ssl.beta must be non-negative");
  if (crop_length < 2 * window_radius + 1) {
    throw ConfigError("ssl.crop_length must be at least 2 * window_radius + 1");
  }
  if (negative_probability < 0 || negative_probability > 1) {
    throw ConfigError("ssl.negative_probability must lie in [0, 1]");
  }
  if (!(learning_rate > 0)) throw ConfigError("ssl.learning_rate must be positive");
  if (batch_size == 0) throw ConfigError("ssl.batch_size must be positive");
}

SslCorpus BuildSslCorpus(const std::vector<DatasetRecord>& records, const Vocabulary& vocab,
                         TextMode mode) {
  SslCorpus corpus;
  corpus.reserve(records.size());
  const FieldLimits limits = LimitsFor(mode);
  for (const DatasetRecord& r : records) {
    corpus.push_back({r.id, r.FeatureTensor(), AssembleTokens(r.text, vocab, limits)});
  }
  return corpus;
}

PairSample SamplePair(const SslCorpus& corpus, std::size_t video_index, const SslConfig& config,
                      Rng& rng, std::optional<std::size_t> fixed_crop_begin) {
  if (video_index >= corpus.size()) throw ContractError("SamplePair: video index out of range");
  if (config.negative_probability > 0 && corpus.size() < 2) {
    throw ConfigError("negative pairs need at least two videos");
  }
  PairSample s;
  s.video_index = video_index;
  s.text_index = video_index;
  if (config.negative_probability > 0 && rng.Bernoulli(config.negative_probability)) {
    std::size_t j = static_cast<std::size_t>(rng.UniformInt(corpus.size() - 1));
    if (j >= video_index) ++j;
    s.text_index = j;
  }
  s.label = s.text_index == video_index ? 1 : 0;
  const Tensor& frames = corpus[video_index].frames;
  const std::size_t t = frames.rows();
  if (t > config.crop_length) {
    std::size_t begin = fixed_crop_begin
                            ? std::min(*fixed_crop_begin, t - config.crop_length)
                            : static_cast<std::size_t>(rng.UniformInt(t - config.crop_length + 1));
    s.crop_begin = begin;
    s.frames = SliceRows(frames, begin, config.crop_length);
  } else {
    s.frames = frames;
  }
  s.tokens = corpus[s.text_index].tokens;
  return s;
}

PairSample SamplePair(const SslCorpus& corpus, const SslConfig& config, Rng& rng) {
  if (corpus.empty()) throw DataError("empty pretraining corpus");
  std::size_t i = static_cast<std::size_t>(rng.UniformInt(corpus.size()));
  return SamplePair(corpus, i, config, rng);
}

Tensor BinaryCrossEntropy(const Tensor& probability, int label) {
  Tensor p = Clamp(probability, kProbabilityClamp, 1.0 - kProbabilityClamp);
  if (label == 1) return Negate(Log(p));
  if (label == 0) return Negate(Log(AddScalar(Negate(p), 1.0)));
  throw ContractError("label must be 0 or 1");
}

CoarseResult CoarseLoss(const Model& model, const Tensor& video_repr, const Tensor& text_repr,
                        int label) {
  Tensor p = Sigmoid(CorrespondenceLogit(model, video_repr, text_repr));
  return {BinaryCrossEntropy(p, label), p};
}

HausdorffResult HausdorffDistance(const Tensor& frames, const Tensor& mapped_words) {
  if (frames.rank() != 2 || mapped_words.rank() != 2 || frames.cols() != mapped_words.cols()) {
    throw DimensionError("HausdorffDistance: both sets must be matrices of equal width");
  }
  const std::size_t n = frames.rows(), m = mapped_words.rows(), d = frames.cols();
  if (n == 0 || m == 0) throw ContractError("HausdorffDistance: empty set");
  Tensor a = L2NormalizeRows(frames);
  Tensor b = L2NormalizeRows(mapped_words);
  auto av = a.data();
  auto bv = b.data();
  std::vector<double> dist(n * m);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      double s = 0;
      for (std::size_t k = 0; k < d; ++k) {
        double diff = av[i * d + k] - bv[j * d + k];
        s += diff * diff;
      }
      dist[i * m + j] = std::sqrt(s);
    }
  }
  // Directed frames -> words.
  double best_ab = -1;
  std::size_t ab_i = 0, ab_j = 0;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t arg = 0;
    for (std::size_t j = 1; j < m; ++j) {
      if (dist[i * m + j] < dist[i * m + arg]) arg = j;
    }
    if (dist[i * m + arg] > best_ab) {
      best_ab = dist[i * m + arg];
      ab_i = i;
      ab_j = arg;
    }
  }
  // Directed words -> frames.
  double best_ba = -1;
  std::size_t ba_i = 0, ba_j = 0;
  for (std::size_t j = 0; j < m; ++j) {
    std::size_t arg = 0;
    for (std::size_t i = 1; i < n; ++i) {
      if (dist[i * m + j] < dist[arg * m + j]) arg = i;
    }
    if (dist[arg * m + j] > best_ba) {
      best_ba = dist[arg * m + j];
      ba_i = arg;
      ba_j = j;
    }
  }
  HausdorffResult r;
  if (best_ab >= best_ba) {
    r.frame_index = ab_i;
    r.word_index = ab_j;
  } else {
    r.frame_index = ba_i;
    r.word_index = ba_j;
  }
  Tensor diff = Sub(SliceRows(a, r.frame_index, 1), SliceRows(b, r.word_index, 1));
  r.distance = Sqrt(Sum(Square(diff)));
  return r;
}

Tensor FineLoss(const Tensor& distance, int label, double margin) {
  Tensor d2 = Square(distance);
  if (label == 1) return d2;
  if (label == 0) return Relu(AddScalar(Negate(d2), margin));
  throw ContractError("label must be 0 or 1");
}

MaskedFrames MaskFrameAt(const Tensor& frames, const Tensor& mask_token, std::size_t index) {
  if (frames.rank() != 2) throw DimensionError("MaskFrameAt: frames must be a matrix");
  const std::size_t t = frames.rows(), d = frames.cols();
  if (index >= t) throw ContractError("MaskFrameAt: index out of range");
  if (mask_token.numel() != d) throw DimensionError("MaskFrameAt: mask token width mismatch");
  std::vector<Tensor> parts;
  if (index > 0) parts.push_back(SliceRows(frames, 0, index));
  parts.push_back(Reshape(mask_token, {1, d}));
  if (index + 1 < t) parts.push_back(SliceRows(frames, index + 1, t - index - 1));
  MaskedFrames m;
  m.frames = ConcatRows(parts);
  m.index = index;
  m.original = Reshape(SliceRows(frames, index, 1), {d});
  return m;
}

MaskedFrames MaskFrame(const Tensor& frames, const Tensor& mask_token, Rng& rng) {
  if (frames.rank() != 2 || frames.rows() == 0) {
    throw DimensionError("MaskFrame: frames must be a non-empty matrix");
  }
  return MaskFrameAt(frames, mask_token,
                     static_cast<std::size_t>(rng.UniformInt(frames.rows())));
}

Recovery RecoverFrame(const Model& model, const Tensor& masked_frames,
                      const Tensor& encoded_with_cls, std::size_t index, std::size_t radius,
                      const ForwardOptions& options, std::optional<double> forced_probability) {
  const std::size_t t = masked_frames.rows(), d = masked_frames.cols();
  if (index >= t) throw ContractError("RecoverFrame: index out of range");
  if (encoded_with_cls.rows() != t + 1) {
    throw DimensionError("RecoverFrame: encoding must have one row per frame plus CLS");
  }
  const std::size_t lo = index >= radius ? index - radius : 0;
  const std::size_t hi = std::min(t, index + radius + 1);
  const std::size_t pad_before = radius - (index - lo);
  const std::size_t pad_after = (index + radius + 1) - hi;
  std::vector<Tensor> parts;
  if (pad_before) parts.push_back(Tensor::Zeros({pad_before, d}));
  parts.push_back(SliceRows(masked_frames, lo, hi - lo));
  if (pad_after) parts.push_back(Tensor::Zeros({pad_after, d}));
  Tensor window = parts.size() == 1 ? parts[0] : ConcatRows(parts);

  Tensor center = SliceRows(EncodeWindow(model, window, options), radius, 1);
  Tensor encoded = SliceRows(encoded_with_cls, index + 1, 1);
  Recovery r;
  r.local = MatMul(center, model.local_projection());
  r.global = MatMul(encoded, model.global_projection());
  r.smooth_probability = forced_probability ? Tensor::Scalar(*forced_probability)
                                            : SmoothProbability(model, encoded);
  Tensor mixed = Add(Mul(r.local, r.smooth_probability),
                     Mul(r.global, AddScalar(Negate(r.smooth_probability), 1.0)));
  r.recovered = Reshape(mixed, {d});
  return r;
}

Tensor RecoveryLoss(const Tensor& recovered, const Tensor& target) {
  if (recovered.numel() != target.numel()) throw DimensionError("RecoveryLoss: width mismatch");
  Tensor a = Reshape(recovered, {recovered.numel()});
  Tensor b = Reshape(target, {target.numel()});
  return Mean(Square(Sub(a, b)));
}

SslItemResult SslForward(const Model& model, const PairSample& sample, std::size_t mask_index,
                         const SslConfig& config, const ForwardOptions& options) {
  MaskedFrames masked = MaskFrameAt(sample.frames, model.mask_token(), mask_index);
  Tensor g = EncodeVideo(model, masked.frames, true, options);
  const std::size_t t = masked.frames.rows();
  Tensor z = EncodeText(model, sample.tokens.ids, options);

  CoarseResult coarse = CoarseLoss(model, SliceRows(g, 0, 1), SliceRows(z, 0, 1), sample.label);

  std::vector<int> word_rows;
  for (std::size_t i = 0; i < sample.tokens.is_word.size(); ++i) {
    if (sample.tokens.is_word[i]) word_rows.push_back(static_cast<int>(i));
  }
  Tensor fine = Tensor::Scalar(0.0);
  if (!word_rows.empty()) {
    Tensor mapped = MapTextToVisual(model, GatherRows(z, word_rows));
    HausdorffResult h = HausdorffDistance(SliceRows(g, 1, t), mapped);
    fine = FineLoss(h.distance, sample.label, config.margin);
  }

  Recovery rec =
      RecoverFrame(model, masked.frames, g, mask_index, config.window_radius, options);
  Tensor recovery = RecoveryLoss(rec.recovered, masked.original);

  SslItemResult out;
  out.loss = Add(Add(coarse.loss, Scale(fine, config.alpha)), Scale(recovery, config.beta));
  out.terms.coarse = coarse.loss.item();
  out.terms.fine = fine.item();
  out.terms.recovery = recovery.item();
  out.terms.total = out.loss.item();
  const double p = coarse.probability.item();
  out.terms.accuracy = ((p >= 0.5) == (sample.label == 1)) ? 1.0 : 0.0;
  if (!std::isfinite(out.terms.total)) {
    std::ostringstream msg;
    msg << "non-finite pretraining loss (L1=" << out.terms.coarse << ", L2=" << out.terms.fine
        << ", L3=" << out.terms.recovery << ")";
    throw NumericError(msg.str());
  }
  return out;
}

Pretrainer::Pretrainer(Model& model, SslConfig config, std::uint64_t seed)
    : model_(model), config_(config), rng_(Rng(seed).Stream("ssl")),
      optimizer_(AdamOptions{config.learning_rate}) {
  config_.Validate();
  const ParameterStore& store = model_.store();
  for (std::size_t i = 0; i < store.size(); ++i) {
    const std::string& name = store.names()[i];
    if (name.starts_with("head.")) continue;
    if (config_.freeze_text_encoder && name.starts_with("et.")) continue;
    if (config_.freeze_word_embedding && name == "et.embed") continue;
    params_.push_back(store.tensors()[i]);
  }
}

SslStepReport Pretrainer::Step(const std::vector<PairSample>& batch) {
  if (batch.empty()) throw ContractError("Pretrainer::Step: empty batch");
  const std::int64_t step = optimizer_.steps();
  // All randomness is drawn here, in order, so results do not depend on the
  // worker count.
  Rng mask_rng = rng_.Stream("mask", static_cast<std::uint64_t>(step));
  std::vector<std::size_t> mask_index(batch.size());
  std::vector<Rng> dropout_rng;
  dropout_rng.reserve(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    mask_index[i] = static_cast<std::size_t>(mask_rng.UniformInt(batch[i].frames.rows()));
    dropout_rng.push_back(
        rng_.Stream("dropout", static_cast<std::uint64_t>(step) * 1000003u + i));
  }

  std::vector<SslTerms> terms(batch.size());
  std::vector<std::vector<std::vector<double>>> grads(batch.size());
  ParallelFor(batch.size(), [&](std::size_t i) {
    ForwardOptions opts{model_.config().dropout, &dropout_rng[i]};
    SslItemResult r = SslForward(model_, batch[i], mask_index[i], config_, opts);
    terms[i] = r.terms;
    Gradients g = Backward(r.loss);
    grads[i].reserve(params_.size());
    for (const Tensor& p : params_) grads[i].push_back(g.Of(p));
  });

  std::vector<std::vector<double>> mean(params_.size());
  const double inv = 1.0 / static_cast<double>(batch.size());
  SslStepReport report;
  report.step = step + 1;
  for (std::size_t p = 0; p < params_.size(); ++p) {
    mean[p].assign(params_[p].numel(), 0.0);
    for (std::size_t i = 0; i < batch.size(); ++i) {
      for (std::size_t k = 0; k < mean[p].size(); ++k) mean[p][k] += grads[i][p][k];
    }
    for (double& v : mean[p]) v *= inv;
  }
  for (const SslTerms& t : terms) {
    report.terms.coarse += t.coarse * inv;
    report.terms.fine += t.fine * inv;
    report.terms.recovery += t.recovery * inv;
    report.terms.total += t.total * inv;
    report.terms.accuracy += t.accuracy * inv;
  }
  optimizer_.Step(params_, mean);
  return report;
}

std::vector<PairSample> Pretrainer::NextBatch(const SslCorpus& corpus) {
  if (corpus.empty()) throw DataError("empty pretraining corpus");
  if (fixed_crops_.size() != corpus.size()) fixed_crops_.assign(corpus.size(), std::nullopt);
  std::vector<PairSample> batch;
  batch.reserve(config_.batch_size);
  while (batch.size() < config_.batch_size) {
    if (epoch_pos_ >= epoch_order_.size()) {
      epoch_order_.resize(corpus.size());
      for (std::size_t i = 0; i < corpus.size(); ++i) epoch_order_[i] = i;
      Rng order = rng_.Stream("epoch", epoch_);
      order.Shuffle(epoch_order_);
      epoch_pos_ = 0;
      ++epoch_;
    }
    std::size_t v = epoch_order_[epoch_pos_++];
    Rng pair_rng = rng_.Stream("pair", (epoch_ << 32) ^ epoch_pos_);
    if (config_.recrop_each_epoch) {
      batch.push_back(SamplePair(corpus, v, config_, pair_rng));
    } else {
      PairSample s = SamplePair(corpus, v, config_, pair_rng, fixed_crops_[v]);
      fixed_crops_[v] = s.crop_begin;
      batch.push_back(std::move(s));
    }
  }
  return batch;
}

std::vector<SslStepReport> Pretrain(Model& model, const SslCorpus& corpus, const SslConfig& config,
                                    const PretrainOptions& options) {
  Pretrainer trainer(model, config, options.seed);
  std::vector<SslStepReport> reports;
  reports.reserve(options.steps);
  for (std::size_t s = 0; s < options.steps; ++s) {
    SslStepReport r = trainer.Step(trainer.NextBatch(corpus));
    reports.push_back(r);
    if (options.on_step && options.log_every > 0 &&
        (r.step % static_cast<std::int64_t>(options.log_every) == 0 || s + 1 == options.steps)) {
      options.on_step(r);
    }
  }
  return reports;
}

SslEvaluation EvaluateSsl(const Model& model, const SslCorpus& corpus, const SslConfig& config,
                          std::uint64_t seed) {
  if (corpus.size() < 2) throw DataError("SSL evaluation needs at least two videos");
  const Rng base = Rng(seed).Stream("ssl-eval");
  const std::size_t n = corpus.size();
  struct Item {
    double correct = 0;
    double recovery = 0;
    double baseline = 0;
  };
  std::vector<Item> items(n);
  ParallelFor(n, [&](std::size_t i) {
    NoGradGuard no_grad;
    Rng rng = base.Stream("video", i);
    const Tensor& all = corpus[i].frames;
    const std::size_t len = std::min(all.rows(), config.crop_length);
    const std::size_t begin = static_cast<std::size_t>(rng.UniformInt(all.rows() - len + 1));
    Tensor frames = SliceRows(all, begin, len);
    std::size_t other = static_cast<std::size_t>(rng.UniformInt(n - 1));
    if (other >= i) ++other;
    const std::size_t mask_index = static_cast<std::size_t>(rng.UniformInt(len));

    PairSample pos{i, i, frames, corpus[i].tokens, 1, begin};
    PairSample neg{i, other, frames, corpus[other].tokens, 0, begin};
    SslItemResult rp = SslForward(model, pos, mask_index, config);
    SslItemResult rn = SslForward(model, neg, mask_index, config);
    items[i].correct = rp.terms.accuracy + rn.terms.accuracy;
    items[i].recovery = rp.terms.recovery;

    const std::size_t d = frames.cols();
    std::vector<double> mean(d, 0.0);
    auto fv = frames.data();
    if (len > 1) {
      for (std::size_t r = 0; r < len; ++r) {
        if (r == mask_index) continue;
        for (std::size_t k = 0; k < d; ++k) mean[k] += fv[r * d + k];
      }
      for (double& v : mean) v /= static_cast<double>(len - 1);
    }
    double err = 0;
    for (std::size_t k = 0; k < d; ++k) {
      double diff = mean[k] - fv[mask_index * d + k];
      err += diff * diff;
    }
    items[i].baseline = err / static_cast<double>(d);
  });
  SslEvaluation e;
  e.pairs = 2 * n;
  for (const Item& it : items) {
    e.correspondence_accuracy += it.correct;
    e.recovery_loss += it.recovery;
    e.mean_baseline_loss += it.baseline;
  }
  e.correspondence_accuracy /= static_cast<double>(2 * n);
  e.recovery_loss /= static_cast<double>(n);
  e.mean_baseline_loss /= static_cast<double>(n);
  return e;
}

}  // namespace spvs
