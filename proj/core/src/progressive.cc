#include "spvs/progressive.h"

#include <algorithm>
#include <numeric>
#include <set>

#include "spvs/errors.h"
#include "spvs/gradients.h"
#include "spvs/ops.h"
#include "spvs/parallel.h"

namespace spvs {

void SummarizerConfig::Validate() const {
  if (stages < 1 || stages > kMaxStages) throw ConfigError("stages must lie in 1..4");
  if (max_frames == 0) throw ConfigError("max_frames must be positive");
  if (!(learning_rate > 0)) throw ConfigError("learning rate must be positive");
  if (batch_size == 0) throw ConfigError("batch size must be positive");
  if (folds < 2) throw ConfigError("cross-validation needs at least two folds");
}

Tensor RefineInput(const Tensor& previous, const Tensor& previous_scores) {
  if (previous.rank() != 2 || previous_scores.numel() != previous.rows()) {
    throw DimensionError("refine_input: " + std::to_string(previous_scores.numel()) +
                         " scores for input of shape " + ShapeToString(previous.shape()));
  }
  return Add(ScaleRows(previous, previous_scores), previous);
}

StageOutput StageForward(const Model& model, const Tensor& input, std::size_t stage,
                         const Tensor* text_feature, const ForwardOptions& options) {
  if (text_feature != nullptr && stage != 1) {
    throw ContractError("text features are only used by the first stage");
  }
  const std::size_t d = model.config().frame_dim;
  const StageHead& head = model.stage_head(stage);
  StageOutput out;
  out.input = input;
  out.encoded = EncodeVideo(model, input, false, options);
  Tensor h = Add(out.encoded, input);
  if (text_feature != nullptr) {
    if (text_feature->numel() != d) throw DimensionError("text feature width mismatch");
    h = AddRowVector(h, Reshape(*text_feature, {d}));
  }
  Tensor logits = Reshape(MatMul(h, Reshape(head.weight, {d, 1})), {input.rows()});
  out.scores = Sigmoid(Add(logits, head.bias));
  return out;
}

Tensor TextFeature(const Model& model, const TokenSequence& tokens,
                   const ForwardOptions& options) {
  Tensor z = EncodeText(model, tokens.ids, options);
  return MapTextToVisual(model, SliceRows(z, 0, 1));
}

Tensor FinalScores(std::span<const Tensor> stage_scores) {
  if (stage_scores.empty()) throw ContractError("final_scores: no stages");
  Tensor out = stage_scores[0];
  for (std::size_t i = 1; i < stage_scores.size(); ++i) {
    if (stage_scores[i].shape() != out.shape()) {
      throw DimensionError("final_scores: stage lengths differ");
    }
    out = Mul(out, stage_scores[i]);
  }
  return out;
}

Tensor VsLoss(const Tensor& final_scores, std::span<const double> target,
              std::size_t valid_length) {
  const std::size_t t = final_scores.numel();
  if (target.size() != t) {
    throw DimensionError("vs_loss: " + std::to_string(target.size()) + " targets for " +
                         std::to_string(t) + " scores");
  }
  const std::size_t valid = valid_length == 0 ? t : valid_length;
  if (valid > t) throw DimensionError("vs_loss: valid length exceeds sequence length");
  Tensor s = Reshape(final_scores, {t, 1});
  if (valid < t) s = SliceRows(s, 0, valid);
  Tensor gt = Tensor::FromData({valid, 1}, std::vector<double>(target.begin(),
                                                               target.begin() + valid));
  return Mean(Square(Sub(s, gt)));
}

ForwardResult SummarizerForward(const Model& model, const Tensor& frames, std::size_t stages,
                                const TokenSequence* tokens, const ForwardOptions& options) {
  if (stages < 1 || stages > model.config().stages) {
    throw ConfigError("model holds " + std::to_string(model.config().stages) +
                      " stage heads, " + std::to_string(stages) + " requested");
  }
  ForwardResult r;
  std::optional<Tensor> text;
  if (tokens != nullptr) text = TextFeature(model, *tokens, options);
  Tensor input = frames;
  std::vector<Tensor> scores;
  for (std::size_t n = 1; n <= stages; ++n) {
    if (n > 1) input = RefineInput(input, r.stages.back().scores);
    r.stages.push_back(
        StageForward(model, input, n, n == 1 && text ? &*text : nullptr, options));
    scores.push_back(r.stages.back().scores);
  }
  r.final_scores = FinalScores(scores);
  return r;
}

ScorePrediction Predict(const Model& model, const Tensor& frames, std::size_t stages,
                        const TokenSequence* tokens) {
  NoGradGuard no_grad;
  ForwardResult r = SummarizerForward(model, frames, stages, tokens);
  ScorePrediction p;
  for (const StageOutput& s : r.stages) p.stage_scores.push_back(s.scores.ToVector());
  p.final_scores = r.final_scores.ToVector();
  return p;
}

std::vector<SummaryExample> BuildExamples(const std::vector<DatasetRecord>& records,
                                          const Vocabulary* vocab) {
  std::vector<SummaryExample> out;
  out.reserve(records.size());
  const FieldLimits limits = LimitsFor(TextMode::kSummarize);
  for (const DatasetRecord& r : records) {
    if (r.annotations.empty()) throw DataError("video '" + r.id + "' has no annotations");
    for (const auto& a : r.annotations) {
      if (a.size() != r.frames) {
        throw DataError("video '" + r.id + "': annotation of length " +
                        std::to_string(a.size()) + " for " + std::to_string(r.frames) +
                        " frames");
      }
    }
    SummaryExample e;
    e.id = r.id;
    e.frames = r.FeatureTensor();
    e.target = r.MeanAnnotation();
    if (vocab != nullptr) e.tokens = AssembleTokens(r.text, *vocab, limits);
    out.push_back(std::move(e));
  }
  return out;
}

SummarizerTrainer::SummarizerTrainer(Model& model, SummarizerConfig config, std::uint64_t seed)
    : model_(model), config_(config), rng_(Rng(seed).Stream("summarizer")),
      optimizer_(AdamOptions{config.learning_rate}) {
  config_.Validate();
  if (config_.stages > model_.config().stages) {
    throw ConfigError("model holds fewer stage heads than configured stages");
  }
  const ParameterStore& store = model_.store();
  for (std::size_t i = 0; i < store.size(); ++i) {
    const std::string& name = store.names()[i];
    bool keep = name.starts_with("ev.");
    for (std::size_t n = 1; n <= config_.stages; ++n) {
      keep = keep || name.starts_with("head.stage" + std::to_string(n) + ".");
    }
    if (config_.use_text) keep = keep || name.starts_with("et.") || name.starts_with("mlp_t.");
    if (config_.freeze_word_embedding && name == "et.embed") keep = false;
    if (keep) {
      names_.push_back(name);
      params_.push_back(store.tensors()[i]);
    }
  }
}

double SummarizerTrainer::Step(const std::vector<const SummaryExample*>& batch,
                               const std::vector<std::size_t>& crop_begin) {
  if (batch.empty() || batch.size() != crop_begin.size()) {
    throw ContractError("SummarizerTrainer::Step: empty or inconsistent batch");
  }
  const std::int64_t step = optimizer_.steps();
  std::vector<Rng> dropout_rng;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    dropout_rng.push_back(
        rng_.Stream("dropout", static_cast<std::uint64_t>(step) * 1000003u + i));
  }
  std::vector<double> losses(batch.size());
  std::vector<std::vector<std::vector<double>>> grads(batch.size());
  ParallelFor(batch.size(), [&](std::size_t i) {
    const SummaryExample& e = *batch[i];
    const std::size_t len = std::min(e.frames.rows(), config_.max_frames);
    const std::size_t begin = crop_begin[i];
    Tensor frames = len == e.frames.rows() ? e.frames : SliceRows(e.frames, begin, len);
    std::span<const double> target(e.target.data() + begin, len);
    ForwardOptions opts{model_.config().dropout, &dropout_rng[i]};
    const TokenSequence* tokens = config_.use_text ? &e.tokens : nullptr;
    ForwardResult r = SummarizerForward(model_, frames, config_.stages, tokens, opts);
    Tensor loss = VsLoss(r.final_scores, target);
    losses[i] = loss.item();
    Gradients g = Backward(loss);
    grads[i].reserve(params_.size());
    for (const Tensor& p : params_) grads[i].push_back(g.Of(p));
  });
  const double inv = 1.0 / static_cast<double>(batch.size());
  std::vector<std::vector<double>> mean(params_.size());
  for (std::size_t p = 0; p < params_.size(); ++p) {
    mean[p].assign(params_[p].numel(), 0.0);
    for (std::size_t i = 0; i < batch.size(); ++i) {
      for (std::size_t k = 0; k < mean[p].size(); ++k) mean[p][k] += grads[i][p][k];
    }
    for (double& v : mean[p]) v *= inv;
  }
  optimizer_.Step(params_, mean);
  double total = 0;
  for (double l : losses) total += l * inv;
  return total;
}

EpochReport SummarizerTrainer::RunEpoch(const std::vector<SummaryExample>& examples) {
  if (examples.empty()) throw DataError("no training videos");
  if (config_.use_text) {
    for (const SummaryExample& e : examples) {
      if (e.tokens.ids.empty()) throw ConfigError("text fusion enabled but video '" + e.id +
                                                  "' has no token sequence");
    }
  }
  if (fixed_crops_.size() != examples.size()) fixed_crops_.assign(examples.size(), std::nullopt);
  std::vector<std::size_t> order(examples.size());
  std::iota(order.begin(), order.end(), 0);
  Rng epoch_rng = rng_.Stream("epoch", epoch_);
  epoch_rng.Shuffle(order);

  EpochReport report;
  report.epoch = ++epoch_;
  double total = 0;
  for (std::size_t start = 0; start < order.size(); start += config_.batch_size) {
    const std::size_t end = std::min(order.size(), start + config_.batch_size);
    std::vector<const SummaryExample*> batch;
    std::vector<std::size_t> crops;
    for (std::size_t j = start; j < end; ++j) {
      const std::size_t v = order[j];
      const std::size_t t = examples[v].frames.rows();
      std::size_t begin = 0;
      if (t > config_.max_frames) {
        if (config_.recrop_each_epoch || !fixed_crops_[v]) {
          begin = static_cast<std::size_t>(epoch_rng.UniformInt(t - config_.max_frames + 1));
          fixed_crops_[v] = begin;
        } else {
          begin = *fixed_crops_[v];
        }
      }
      batch.push_back(&examples[v]);
      crops.push_back(begin);
    }
    total += Step(batch, crops) * static_cast<double>(batch.size());
  }
  report.loss = total / static_cast<double>(examples.size());
  return report;
}

std::vector<std::size_t> AssignFolds(const std::vector<std::string>& ids, std::size_t folds,
                                     std::uint64_t seed) {
  if (folds == 0) throw ConfigError("fold count must be positive");
  std::set<std::string> unique(ids.begin(), ids.end());
  if (unique.size() != ids.size()) throw DataError("video ids must be unique");
  std::vector<std::pair<std::uint64_t, std::size_t>> keyed;
  keyed.reserve(ids.size());
  const std::string prefix = std::to_string(seed) + ":";
  for (std::size_t i = 0; i < ids.size(); ++i) keyed.emplace_back(HashName(prefix + ids[i]), i);
  std::sort(keyed.begin(), keyed.end(), [&](const auto& a, const auto& b) {
    return a.first != b.first ? a.first < b.first : ids[a.second] < ids[b.second];
  });
  std::vector<std::size_t> fold(ids.size());
  for (std::size_t j = 0; j < keyed.size(); ++j) fold[keyed[j].second] = j % folds;
  return fold;
}

bool IsPretrainedParameter(const std::string& name) { return !name.starts_with("head."); }

CrossValidationResult CrossValidate(const std::vector<DatasetRecord>& records,
                                    const Vocabulary* vocab, const EncoderConfig& encoder,
                                    const SummarizerConfig& config,
                                    const CrossValidationOptions& options) {
  config.Validate();
  if (config.use_text && vocab == nullptr) throw ConfigError("text fusion needs a vocabulary");
  if (records.size() < config.folds) {
    throw ConfigError(std::to_string(config.folds) + " folds need at least as many videos, got " +
                      std::to_string(records.size()));
  }
  for (const DatasetRecord& r : records) r.Validate();
  const std::vector<SummaryExample> examples =
      BuildExamples(records, config.use_text ? vocab : nullptr);
  std::vector<std::string> ids;
  for (const DatasetRecord& r : records) ids.push_back(r.id);
  const std::vector<std::size_t> fold = AssignFolds(ids, config.folds, options.seed);

  EncoderConfig enc = encoder;
  enc.stages = config.stages;
  enc.Validate();
  const Rng base(options.seed);

  CrossValidationResult result;
  result.scores.resize(records.size());
  for (std::size_t k = 0; k < config.folds; ++k) {
    std::vector<SummaryExample> train;
    std::vector<std::size_t> held_out;
    for (std::size_t i = 0; i < examples.size(); ++i) {
      if (fold[i] == k) {
        held_out.push_back(i);
      } else {
        train.push_back(examples[i]);
      }
    }
    Model model(enc, base.Stream("fold-model", k).NextU64());
    if (options.pretrained != nullptr) {
      LoadIntoStore(model.store(), *options.pretrained, IsPretrainedParameter);
    }
    SummarizerTrainer trainer(model, config, base.Stream("fold-train", k).NextU64());
    for (std::size_t e = 0; e < config.epochs; ++e) {
      EpochReport r = trainer.RunEpoch(train);
      if (options.on_epoch) options.on_epoch(k, r);
    }
    if (options.on_fold_model) options.on_fold_model(k, model);
    ParallelFor(held_out.size(), [&](std::size_t j) {
      const std::size_t i = held_out[j];
      const SummaryExample& e = examples[i];
      VideoScores& v = result.scores[i];
      v.id = e.id;
      v.fold = k;
      v.picks = records[i].picks;
      v.prediction = Predict(model, e.frames, config.stages, config.use_text ? &e.tokens : nullptr);
    });
  }

  std::vector<RecordEvaluation>& evaluations = result.evaluations;
  evaluations.resize(records.size());
  ParallelFor(records.size(), [&](std::size_t i) {
    evaluations[i] =
        EvaluateRecord(records[i], result.scores[i].prediction.final_scores, options.evaluation);
  });
  result.report = AggregateEvaluations(evaluations, fold, config.folds);
  return result;
}

}  // namespace spvs
