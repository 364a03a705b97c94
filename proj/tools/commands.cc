#include "commands.h"

#include <CLI11.hpp>
#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <map>
#include <sstream>

#include "run_config.h"
#include "spvs/checkpoint.h"
#include "spvs/dataset.h"
#include "spvs/dumps.h"
#include "spvs/errors.h"
#include "spvs/file_io.h"
#include "spvs/progressive.h"
#include "spvs/segmentation.h"
#include "spvs/ssl.h"
#include "spvs/synthetic.h"
#include "spvs/tokens.h"

namespace spvs::cli {
namespace {

namespace fs = std::filesystem;

// Help strings carry the default and where it comes from: "published" values
// are the original full-scale settings, "desk" values are sized for a laptop.
std::string Doc(const std::string& what, const std::string& def, const char* provenance) {
  return what + " (default " + def + ", " + provenance + ")";
}

std::string Fmt(double v) {
  std::ostringstream s;
  s << v;
  return s.str();
}

std::string Fixed(const std::optional<double>& v) {
  if (!v) return "undefined";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", *v);
  return buf;
}

struct Common {
  std::string config_path;
  std::uint64_t seed = 7;
  CLI::Option* seed_opt = nullptr;
};

void AddCommon(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config_path, "JSON run configuration; unknown keys are rejected");
  c.seed_opt = cmd->add_option("--seed", c.seed, Doc("random seed", "7", "desk"));
}

RunConfig Resolve(const Common& c) {
  RunConfig config = DeskDefaults();
  if (!c.config_path.empty()) ApplyConfigFile(config, c.config_path);
  if (c.seed_opt->count() > 0) config.seed = c.seed;
  return config;
}

std::vector<DatasetRecord> LoadNonEmpty(const std::string& path) {
  std::vector<DatasetRecord> records = LoadDataset(path);
  if (records.empty()) throw DataError(path + ": dataset has no records");
  for (const DatasetRecord& r : records) {
    if (r.dim != records.front().dim) {
      throw DataError(path + ": video '" + r.id + "' has feature width " + std::to_string(r.dim) +
                      ", expected " + std::to_string(records.front().dim));
    }
  }
  return records;
}

Vocabulary VocabularyFromRecords(const std::vector<DatasetRecord>& records) {
  std::vector<const TextBundle*> bundles;
  for (const DatasetRecord& r : records) bundles.push_back(&r.text);
  return Vocabulary::Build(bundles);
}

std::vector<std::string> NonReservedWords(const Vocabulary& vocab) {
  return {vocab.words().begin() + kReservedTokens, vocab.words().end()};
}

Vocabulary VocabularyFromMeta(const ModelMeta& meta) {
  return Vocabulary::FromWords(meta.vocabulary);
}

void CheckFrameDim(const EncoderConfig& enc, const std::vector<DatasetRecord>& records) {
  if (enc.frame_dim != records.front().dim) {
    throw ConfigError("model expects frame_dim " + std::to_string(enc.frame_dim) +
                      " but the data has width " + std::to_string(records.front().dim));
  }
}

std::map<std::string, const DatasetRecord*> IndexById(const std::vector<DatasetRecord>& records) {
  std::map<std::string, const DatasetRecord*> index;
  for (const DatasetRecord& r : records) index[r.id] = &r;
  return index;
}

const DatasetRecord& Find(const std::map<std::string, const DatasetRecord*>& index,
                          const std::string& id) {
  auto it = index.find(id);
  if (it == index.end()) throw DataError("video '" + id + "' is not in the dataset");
  return *it->second;
}

struct LoadedModel {
  ModelMeta meta;
  Vocabulary vocab;
  Model model;
};

LoadedModel LoadModel(const std::string& checkpoint) {
  ModelMeta meta = LoadModelMeta(checkpoint);
  std::vector<NamedArray> arrays = ReadCheckpoint(checkpoint);
  Model model(meta.encoder, 0);
  LoadIntoStore(model.store(), arrays, [](const std::string&) { return true; });
  Vocabulary vocab = VocabularyFromMeta(meta);
  return {std::move(meta), std::move(vocab), std::move(model)};
}

// Replaces the vocabulary rows of et.embed with vectors from a text table.
std::vector<double> ExternalEmbeddings(const std::string& path, const Vocabulary& vocab,
                                       const EncoderConfig& enc, std::vector<double> initial,
                                       std::ostream& err) {
  EmbeddingTable table = LoadWordEmbeddings(path, vocab, enc.word_dim, std::move(initial));
  err << "word embeddings: " << table.matched << " of " << vocab.size() - kReservedTokens
      << " vocabulary words found in " << path << "\n";
  return std::move(table.values);
}

// ---------------------------------------------------------------- gen-synth

struct GenSynthArgs {
  Common common;
  SyntheticOptions synth;
  std::string out;
  bool blob = false;
};

int GenSynth(const GenSynthArgs& a, std::ostream& out) {
  RunConfig config = Resolve(a.common);
  SyntheticOptions opts = a.synth;
  opts.seed = config.seed;
  std::vector<DatasetRecord> records = GenerateSynthetic(opts);
  SaveDataset(a.out, records, a.blob ? FeatureStorage::kBlob : FeatureStorage::kInline);
  out << "wrote " << records.size() << " videos to " << a.out << "\n";
  return kExitOk;
}

// ----------------------------------------------------------------- pretrain

struct PretrainArgs {
  Common common;
  std::string data;
  std::string eval_data;
  std::string out;
  std::size_t steps = kDeskSslSteps;
  CLI::Option* steps_opt = nullptr;
  double lr = kDeskSslLearningRate;
  CLI::Option* lr_opt = nullptr;
  bool freeze_text = false;
  std::string word_embeddings;
};

int Pretrain(const PretrainArgs& a, std::ostream& out, std::ostream& err) {
  RunConfig config = Resolve(a.common);
  if (a.steps_opt->count()) config.ssl_steps = a.steps;
  if (a.lr_opt->count()) config.ssl.learning_rate = a.lr;
  if (a.freeze_text) config.ssl.freeze_text_encoder = true;
  config.ssl.Validate();

  std::vector<DatasetRecord> records = LoadNonEmpty(a.data);
  Vocabulary vocab = VocabularyFromRecords(records);
  EncoderConfig enc = config.encoder;
  enc.frame_dim = records.front().dim;
  enc.vocab_size = vocab.size();
  enc.stages = config.summarizer.stages;
  Model model(enc, config.seed);
  if (!a.word_embeddings.empty()) {
    const std::vector<double> table = ExternalEmbeddings(
        a.word_embeddings, vocab, enc, model.word_embedding().ToVector(), err);
    model.store().Assign("et.embed", table);
    config.ssl.freeze_word_embedding = true;
  }
  SslCorpus corpus = BuildSslCorpus(records, vocab, TextMode::kPretrain);

  ModelMeta meta{enc, config.summarizer.stages, false, NonReservedWords(vocab)};
  std::string log;
  PretrainOptions opts;
  opts.steps = config.ssl_steps;
  opts.seed = config.seed;
  opts.on_step = [&](const SslStepReport& r) {
    log += SslStepToJson(r);
    log.push_back('\n');
    if (r.step % 100 == 0) {
      err << "step " << r.step << " loss " << r.terms.total << " acc " << r.terms.accuracy << "\n";
    }
    if (config.checkpoint_every > 0 &&
        r.step % static_cast<std::int64_t>(config.checkpoint_every) == 0) {
      const std::string path = a.out + ".step" + std::to_string(r.step);
      SaveCheckpoint(path, model.store());
      SaveModelMeta(path, meta);
    }
  };
  Pretrain(model, corpus, config.ssl, opts);
  SaveCheckpoint(a.out, model.store());
  SaveModelMeta(a.out, meta);
  WriteFileAtomic(a.out + ".log.jsonl", log);
  out << "wrote " << a.out << " after " << config.ssl_steps << " steps\n";

  if (!a.eval_data.empty()) {
    std::vector<DatasetRecord> held = LoadNonEmpty(a.eval_data);
    CheckFrameDim(enc, held);
    SslEvaluation e =
        EvaluateSsl(model, BuildSslCorpus(held, vocab, TextMode::kPretrain), config.ssl,
                    config.seed);
    WriteFileAtomic(a.out + ".eval.json", SslEvaluationToJson(e));
    out << "held-out correspondence accuracy " << Fixed(e.correspondence_accuracy)
        << ", recovery loss " << Fixed(e.recovery_loss) << " (mean baseline "
        << Fixed(e.mean_baseline_loss) << ")\n";
  }
  return kExitOk;
}

// -------------------------------------------------------------------- train

struct SummarizerFlags {
  std::size_t stages = 3;
  CLI::Option* stages_opt = nullptr;
  bool use_text = false;
  std::size_t epochs = 40;
  CLI::Option* epochs_opt = nullptr;
  double lr = kDeskSummarizerLearningRate;
  CLI::Option* lr_opt = nullptr;
  std::size_t folds = 5;
  CLI::Option* folds_opt = nullptr;
  double budget = 0.15;
  CLI::Option* budget_opt = nullptr;
};

void AddBudget(CLI::App* cmd, SummarizerFlags& f) {
  f.budget_opt =
      cmd->add_option("--budget", f.budget, Doc("summary length as a fraction of the video", "0.15",
                                                "published"));
}

void ApplySummarizerFlags(RunConfig& config, const SummarizerFlags& f) {
  if (f.stages_opt && f.stages_opt->count()) config.summarizer.stages = f.stages;
  if (f.use_text) config.summarizer.use_text = true;
  if (f.epochs_opt && f.epochs_opt->count()) config.summarizer.epochs = f.epochs;
  if (f.lr_opt && f.lr_opt->count()) config.summarizer.learning_rate = f.lr;
  if (f.folds_opt && f.folds_opt->count()) config.summarizer.folds = f.folds;
  if (f.budget_opt && f.budget_opt->count()) config.evaluation.budget = f.budget;
  if (!(config.evaluation.budget > 0 && config.evaluation.budget <= 1)) {
    throw ConfigError("budget must lie in (0, 1]");
  }
  config.summarizer.Validate();
}

struct TrainArgs {
  Common common;
  SummarizerFlags flags;
  std::string data;
  std::string pretrained;
  std::string word_embeddings;
  std::string out;
  bool ablate = false;
};

struct TrainSetup {
  // Checkpoint arrays copied into each fold model; holds only et.embed when
  // external embeddings are given without a pretrained checkpoint.
  std::optional<std::vector<NamedArray>> pretrained;
  bool from_checkpoint = false;
  Vocabulary vocab;
  EncoderConfig encoder;
};

TrainSetup PrepareTraining(RunConfig& config, const TrainArgs& a,
                           const std::vector<DatasetRecord>& records, std::ostream& err) {
  TrainSetup s;
  if (!a.pretrained.empty()) {
    ModelMeta meta = LoadModelMeta(a.pretrained);
    s.pretrained = ReadCheckpoint(a.pretrained);
    s.from_checkpoint = true;
    s.vocab = VocabularyFromMeta(meta);
    s.encoder = meta.encoder;
    s.encoder.dropout = config.encoder.dropout;
  } else {
    s.vocab = VocabularyFromRecords(records);
    s.encoder = config.encoder;
    s.encoder.frame_dim = records.front().dim;
    s.encoder.vocab_size = s.vocab.size();
  }
  CheckFrameDim(s.encoder, records);
  if (!a.word_embeddings.empty()) {
    if (!s.pretrained) s.pretrained.emplace();
    auto it = std::find_if(s.pretrained->begin(), s.pretrained->end(),
                           [](const NamedArray& n) { return n.name == "et.embed"; });
    std::vector<double> initial;
    if (it != s.pretrained->end()) {
      initial.assign(it->values.begin(), it->values.end());
    } else {
      initial = Model(s.encoder, config.seed).word_embedding().ToVector();
    }
    const std::vector<double> table =
        ExternalEmbeddings(a.word_embeddings, s.vocab, s.encoder, std::move(initial), err);
    NamedArray embed{"et.embed", {s.vocab.size(), s.encoder.word_dim},
                     std::vector<float>(table.begin(), table.end())};
    if (it != s.pretrained->end()) {
      *it = std::move(embed);
    } else {
      s.pretrained->push_back(std::move(embed));
    }
    config.summarizer.freeze_word_embedding = true;
  }
  return s;
}

CrossValidationResult RunFolds(const RunConfig& config, const SummarizerConfig& summarizer,
                               const TrainSetup& setup, bool use_pretrained,
                               const std::vector<DatasetRecord>& records, std::ostream& err,
                               const std::function<void(std::size_t, const Model&)>& on_model) {
  CrossValidationOptions opts;
  opts.seed = config.seed;
  opts.evaluation = config.evaluation;
  if (use_pretrained && setup.pretrained) opts.pretrained = &*setup.pretrained;
  opts.on_epoch = [&](std::size_t fold, const EpochReport& r) {
    if (r.epoch % 10 == 0 || r.epoch == summarizer.epochs) {
      err << "fold " << fold << " epoch " << r.epoch << " loss " << r.loss << "\n";
    }
  };
  opts.on_fold_model = on_model;
  return CrossValidate(records, &setup.vocab, setup.encoder, summarizer, opts);
}

std::vector<VideoMetrics> PerVideo(const CrossValidationResult& r) {
  std::vector<VideoMetrics> v;
  for (std::size_t i = 0; i < r.scores.size(); ++i) {
    v.push_back({r.scores[i].id, r.scores[i].fold, r.evaluations[i]});
  }
  return v;
}

int Train(const TrainArgs& a, std::ostream& out, std::ostream& err) {
  RunConfig config = Resolve(a.common);
  ApplySummarizerFlags(config, a.flags);
  std::vector<DatasetRecord> records = LoadNonEmpty(a.data);
  const TrainSetup setup = PrepareTraining(config, a, records, err);
  fs::create_directories(a.out);
  const fs::path dir(a.out);

  if (a.ablate) {
    std::vector<AblationRow> rows;
    for (std::size_t stages = 1; stages <= kMaxStages; ++stages) {
      for (int pre = 0; pre <= (setup.from_checkpoint ? 1 : 0); ++pre) {
        for (int text = 0; text <= 1; ++text) {
          SummarizerConfig s = config.summarizer;
          s.stages = stages;
          s.use_text = text == 1;
          CrossValidationResult r =
              RunFolds(config, s, setup, pre == 1 || !setup.from_checkpoint, records, err, nullptr);
          rows.push_back({stages, pre == 1, text == 1, r.report.fold_mean});
          out << "stages " << stages << " pretrained " << (pre ? "yes" : "no") << " text "
              << (text ? "yes" : "no") << ": tau " << Fixed(r.report.fold_mean.tau) << " rho "
              << Fixed(r.report.fold_mean.rho) << " F " << Fixed(r.report.fold_mean.f) << "\n";
        }
      }
    }
    WriteFileAtomic(dir / "ablation.csv", AblationCsv(rows));
    out << "wrote " << (dir / "ablation.csv").string() << "\n";
    return kExitOk;
  }

  ModelMeta meta{setup.encoder, config.summarizer.stages, config.summarizer.use_text,
                 NonReservedWords(setup.vocab)};
  meta.encoder.stages = config.summarizer.stages;
  CrossValidationResult r =
      RunFolds(config, config.summarizer, setup, true, records, err,
               [&](std::size_t fold, const Model& model) {
                 const fs::path path = dir / ("fold" + std::to_string(fold) + ".ck");
                 SaveCheckpoint(path, model.store());
                 SaveModelMeta(path, meta);
               });
  WriteFileAtomic(dir / "scores.jsonl", ScoresToJsonLines(r.scores));
  WriteFileAtomic(dir / "report.json", EvaluationReportToJson(r.report, PerVideo(r)));
  out << "fold-mean tau " << Fixed(r.report.fold_mean.tau) << " rho "
      << Fixed(r.report.fold_mean.rho) << " F " << Fixed(r.report.fold_mean.f);
  if (r.report.fold_mean.tau_planted) {
    out << " tau(planted) " << Fixed(r.report.fold_mean.tau_planted);
  }
  out << "\nwrote " << (dir / "report.json").string() << "\n";
  return kExitOk;
}

// -------------------------------------------------------------------- score

struct ScoreArgs {
  Common common;
  std::string data;
  std::string model;
  std::string out;
};

int Score(const ScoreArgs& a, std::ostream& out) {
  Resolve(a.common);
  std::vector<DatasetRecord> records = LoadNonEmpty(a.data);
  LoadedModel m = LoadModel(a.model);
  CheckFrameDim(m.meta.encoder, records);
  const FieldLimits limits = LimitsFor(TextMode::kSummarize);
  std::vector<VideoScores> scores(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    const DatasetRecord& r = records[i];
    TokenSequence tokens;
    if (m.meta.use_text) tokens = AssembleTokens(r.text, m.vocab, limits);
    scores[i].id = r.id;
    scores[i].picks = r.picks;
    scores[i].prediction = Predict(m.model, r.FeatureTensor(), m.meta.stages,
                                   m.meta.use_text ? &tokens : nullptr);
  }
  WriteFileAtomic(a.out, ScoresToJsonLines(scores));
  out << "scored " << scores.size() << " videos into " << a.out << "\n";
  return kExitOk;
}

// -------------------------------------------------------- summarize/segment

struct SegmentArgs {
  Common common;
  SummarizerFlags flags;
  std::string data;
  std::string scores;
  std::string out;
};

int Summarize(const SegmentArgs& a, bool with_scores, std::ostream& out) {
  RunConfig config = Resolve(a.common);
  if (a.flags.budget_opt && a.flags.budget_opt->count()) config.evaluation.budget = a.flags.budget;
  if (!(config.evaluation.budget > 0 && config.evaluation.budget <= 1)) {
    throw ConfigError("budget must lie in (0, 1]");
  }
  std::vector<DatasetRecord> records = LoadNonEmpty(a.data);
  const auto index = IndexById(records);
  std::vector<SegmentRecord> segments;
  if (with_scores) {
    for (const VideoScores& v : LoadScores(a.scores)) {
      const DatasetRecord& r = Find(index, v.id);
      if (v.prediction.final_scores.size() != r.frames) {
        throw DataError("video '" + v.id + "': score count does not match the frame count");
      }
      SegmentRecord s;
      s.id = v.id;
      s.segmentation = KtsSegment(r.FeatureTensor(), config.evaluation.kts);
      s.shot_scores = ShotScores(v.prediction.final_scores, s.segmentation);
      s.summary = SummarizeScores(v.prediction.final_scores, s.segmentation,
                                  config.evaluation.budget, config.evaluation.shot_value);
      std::vector<std::uint8_t> mask =
          ExpandToOriginal(s.summary->frame_mask, r.picks, r.original_frames);
      for (std::size_t f = 0; f < mask.size(); ++f) {
        if (mask[f]) s.summary_frames.push_back(static_cast<std::int64_t>(f));
      }
      segments.push_back(std::move(s));
    }
  } else {
    for (const DatasetRecord& r : records) {
      SegmentRecord s;
      s.id = r.id;
      s.segmentation = KtsSegment(r.FeatureTensor(), config.evaluation.kts);
      segments.push_back(std::move(s));
    }
  }
  WriteFileAtomic(a.out, SegmentsToJsonLines(segments));
  out << "wrote " << segments.size() << " videos to " << a.out << "\n";
  return kExitOk;
}

// ----------------------------------------------------------------- evaluate

struct EvaluateArgs {
  Common common;
  SummarizerFlags flags;
  std::string data;
  std::string scores;
  std::string out;
};

int Evaluate(const EvaluateArgs& a, std::ostream& out) {
  RunConfig config = Resolve(a.common);
  if (a.flags.budget_opt->count()) config.evaluation.budget = a.flags.budget;
  std::vector<DatasetRecord> records = LoadNonEmpty(a.data);
  const auto index = IndexById(records);
  std::vector<VideoScores> scores = LoadScores(a.scores);
  if (scores.empty()) throw DataError(a.scores + ": no scores");
  std::vector<RecordEvaluation> evals(scores.size());
  std::vector<std::size_t> folds(scores.size());
  std::size_t fold_count = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    evals[i] = EvaluateRecord(Find(index, scores[i].id), scores[i].prediction.final_scores,
                              config.evaluation);
    folds[i] = scores[i].fold;
    fold_count = std::max(fold_count, folds[i] + 1);
  }
  EvaluationReport report = AggregateEvaluations(evals, folds, fold_count);
  std::vector<VideoMetrics> per;
  for (std::size_t i = 0; i < scores.size(); ++i) per.push_back({scores[i].id, folds[i], evals[i]});
  WriteFileAtomic(a.out, EvaluationReportToJson(report, per));
  out << "fold-mean tau " << Fixed(report.fold_mean.tau) << " rho "
      << Fixed(report.fold_mean.rho) << " F " << Fixed(report.fold_mean.f) << "\nwrote " << a.out
      << "\n";
  return kExitOk;
}

// ------------------------------------------------------------------ inspect

int Inspect(const std::string& checkpoint, std::ostream& out) {
  std::vector<NamedArray> arrays = ReadCheckpoint(checkpoint);
  std::size_t total = 0;
  for (const NamedArray& a : arrays) {
    out << a.name << " " << ShapeToString(a.shape) << "\n";
    total += a.values.size();
  }
  out << arrays.size() << " tensors, " << total << " values\n";
  return kExitOk;
}

}  // namespace

int RunCli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Progressive video summarization with video-text pretraining"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");
  const SslConfig ssl_defaults;
  const SummarizerConfig summ_defaults;
  const EncoderConfig enc_defaults = DeskDefaults().encoder;
  app.footer(
      "Defaults marked 'published' are the original full-scale settings; 'desk' defaults are\n"
      "scaled for a single CPU. Config keys not exposed as flags and their defaults:\n"
      "  encoder: word_dim " + std::to_string(enc_defaults.word_dim) + ", video_layers " +
      std::to_string(enc_defaults.video_layers) + ", text_layers " +
      std::to_string(enc_defaults.text_layers) + ", heads " + std::to_string(enc_defaults.heads) +
      ", ffn_dim 4*width, dropout " + Fmt(enc_defaults.dropout) + " (desk)\n"
      "  ssl: margin sqrt(2), window_radius " + std::to_string(ssl_defaults.window_radius) +
      ", alpha " + Fmt(ssl_defaults.alpha) + ", beta " + Fmt(ssl_defaults.beta) +
      ", crop_length " + std::to_string(ssl_defaults.crop_length) + ", negative_probability " +
      Fmt(ssl_defaults.negative_probability) + ", batch_size " +
      std::to_string(ssl_defaults.batch_size) + " (published)\n"
      "  summarizer: max_frames " + std::to_string(summ_defaults.max_frames) + ", batch_size " +
      std::to_string(summ_defaults.batch_size) + " (published)\n"
      "  evaluation: kts_penalty 1, kts_max_change_points ceil(T/10) (desk)\n"
      "SPVS_THREADS caps the worker count.");

  GenSynthArgs gen;
  auto* gen_cmd = app.add_subcommand("gen-synth", "Write a synthetic planted-importance corpus");
  AddCommon(gen_cmd, gen.common);
  gen_cmd->add_option("--videos", gen.synth.videos, Doc("number of videos", "50", "desk"));
  gen_cmd->add_option("--frames", gen.synth.frames, Doc("frames per video at 2 FPS", "128", "desk"));
  gen_cmd->add_option("--dim", gen.synth.dim, Doc("feature width", "64", "desk"));
  gen_cmd->add_option("--vocab", gen.synth.vocab, Doc("distinct words", "240", "desk"));
  gen_cmd->add_option("--topics", gen.synth.topics, Doc("latent topics", "12", "desk"));
  gen_cmd->add_option("--annotators", gen.synth.annotators, Doc("annotators per video", "3", "desk"));
  gen_cmd->add_flag("--blob", gen.blob, "Store features as f32 blobs next to the dataset");
  gen_cmd->add_option("--out", gen.out, "Output dataset (JSON lines)")->required();

  PretrainArgs pre;
  auto* pre_cmd = app.add_subcommand("pretrain", "Self-supervised video-text pretraining");
  AddCommon(pre_cmd, pre.common);
  pre_cmd->add_option("--data", pre.data, "Training dataset")->required();
  pre_cmd->add_option("--eval-data", pre.eval_data, "Held-out dataset for a final evaluation");
  pre.steps_opt =
      pre_cmd->add_option("--steps", pre.steps, Doc("optimizer steps", "2000", "desk"));
  pre.lr_opt = pre_cmd->add_option(
      "--lr", pre.lr, Doc("learning rate", Fmt(kDeskSslLearningRate), "desk; published 1e-6"));
  pre_cmd->add_flag("--freeze-text", pre.freeze_text, "Do not update the text encoder");
  pre_cmd->add_option("--word-embeddings", pre.word_embeddings,
                      "Fixed word vectors, one 'word v1 ... v_word_dim' per line");
  pre_cmd->add_option("--out", pre.out, "Output checkpoint")->required();

  TrainArgs train;
  auto* train_cmd = app.add_subcommand("train", "Cross-validated training of the summarizer");
  AddCommon(train_cmd, train.common);
  train_cmd->add_option("--data", train.data, "Annotated dataset")->required();
  train.flags.stages_opt = train_cmd->add_option(
      "--stages", train.flags.stages, Doc("number of progressive stages, 1-4", "3", "published"));
  train_cmd->add_flag("--use-text", train.flags.use_text,
                      Doc("fuse the text encoding into the first stage", "off", "published"));
  train_cmd->add_option("--pretrained", train.pretrained,
                        "Pretrained checkpoint for the encoders (stage heads start fresh)");
  train.flags.epochs_opt =
      train_cmd->add_option("--epochs", train.flags.epochs, Doc("epochs per fold", "40", "published"));
  train.flags.lr_opt = train_cmd->add_option(
      "--lr", train.flags.lr,
      Doc("learning rate", Fmt(kDeskSummarizerLearningRate), "desk; published 1e-5"));
  train.flags.folds_opt = train_cmd->add_option(
      "--folds", train.flags.folds, Doc("cross-validation folds", "5", "published"));
  AddBudget(train_cmd, train.flags);
  train_cmd->add_flag("--ablate", train.ablate,
                      "Run stages 1-4 x pretraining x text and write ablation.csv");
  train_cmd->add_option("--word-embeddings", train.word_embeddings,
                        "Fixed word vectors, one 'word v1 ... v_word_dim' per line");
  train_cmd->add_option("--out", train.out, "Output directory")->required();

  ScoreArgs score;
  auto* score_cmd = app.add_subcommand("score", "Per-frame importance scores from a trained model");
  AddCommon(score_cmd, score.common);
  score_cmd->add_option("--data", score.data, "Dataset to score")->required();
  score_cmd->add_option("--model", score.model, "Trained checkpoint")->required();
  score_cmd->add_option("--out", score.out, "Output score dump (JSON lines)")->required();

  SegmentArgs summ;
  auto* summ_cmd = app.add_subcommand("summarize", "Shot-level summaries from score dumps");
  AddCommon(summ_cmd, summ.common);
  summ_cmd->add_option("--data", summ.data, "Dataset the scores belong to")->required();
  summ_cmd->add_option("--scores", summ.scores, "Score dump")->required();
  AddBudget(summ_cmd, summ.flags);
  summ_cmd->add_option("--out", summ.out, "Output summary dump (JSON lines)")->required();

  SegmentArgs seg;
  auto* seg_cmd = app.add_subcommand("segment", "Kernel temporal segmentation of every video");
  AddCommon(seg_cmd, seg.common);
  seg_cmd->add_option("--data", seg.data, "Dataset")->required();
  seg_cmd->add_option("--out", seg.out, "Output segment dump (JSON lines)")->required();

  EvaluateArgs eval;
  auto* eval_cmd = app.add_subcommand("evaluate", "Kendall, Spearman and F-score of a score dump");
  AddCommon(eval_cmd, eval.common);
  eval_cmd->add_option("--data", eval.data, "Annotated dataset")->required();
  eval_cmd->add_option("--scores", eval.scores, "Score dump")->required();
  AddBudget(eval_cmd, eval.flags);
  eval_cmd->add_option("--out", eval.out, "Output report (JSON)")->required();

  std::string inspect_path;
  auto* inspect_cmd = app.add_subcommand("inspect", "List the tensors of a checkpoint");
  inspect_cmd->add_option("checkpoint", inspect_path, "Checkpoint file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfigError;
  }

  try {
    if (gen_cmd->parsed()) return GenSynth(gen, out);
    if (pre_cmd->parsed()) return Pretrain(pre, out, err);
    if (train_cmd->parsed()) return Train(train, out, err);
    if (score_cmd->parsed()) return Score(score, out);
    if (summ_cmd->parsed()) return Summarize(summ, true, out);
    if (seg_cmd->parsed()) return Summarize(seg, false, out);
    if (eval_cmd->parsed()) return Evaluate(eval, out);
    if (inspect_cmd->parsed()) return Inspect(inspect_path, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << "\n";
    return kExitDataError;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitDataError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitDataError;
  }
  return kExitConfigError;
}

}  // namespace spvs::cli
