#include "run_config.h"

#include <json.hpp>

#include "spvs/errors.h"
#include "spvs/file_io.h"

namespace spvs::cli {
namespace {

using nlohmann::json;

template <typename T>
void Read(const json& obj, const std::string& section, const char* key, T& out) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config key " + section + "." + key + " has the wrong type");
  }
}

void CheckKeys(const json& obj, const std::string& section,
               std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ConfigError("config section " + section + " must be an object");
  for (const auto& item : obj.items()) {
    bool known = false;
    for (const char* a : allowed) known = known || item.key() == a;
    if (!known) throw ConfigError("unknown config key " + section + "." + item.key());
  }
}

}  // namespace

RunConfig DeskDefaults() {
  RunConfig c;
  c.ssl.learning_rate = kDeskSslLearningRate;
  c.summarizer.learning_rate = kDeskSummarizerLearningRate;
  c.encoder.word_dim = kDeskWordDim;
  c.encoder.video_layers = kDeskVideoLayers;
  c.encoder.text_layers = kDeskTextLayers;
  return c;
}

void ApplyConfigJson(RunConfig& config, const std::string& text, const std::string& origin) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(origin + ": invalid JSON: " + e.what());
  }
  CheckKeys(j, "<root>", {"seed", "encoder", "ssl", "summarizer", "evaluation"});
  Read(j, "<root>", "seed", config.seed);

  if (j.contains("encoder")) {
    const json& e = j.at("encoder");
    CheckKeys(e, "encoder",
              {"frame_dim", "word_dim", "video_layers", "text_layers", "heads", "ffn_dim",
               "max_positions", "dropout"});
    EncoderConfig& c = config.encoder;
    Read(e, "encoder", "frame_dim", c.frame_dim);
    Read(e, "encoder", "word_dim", c.word_dim);
    Read(e, "encoder", "video_layers", c.video_layers);
    Read(e, "encoder", "text_layers", c.text_layers);
    Read(e, "encoder", "heads", c.heads);
    Read(e, "encoder", "ffn_dim", c.ffn_dim);
    Read(e, "encoder", "max_positions", c.max_positions);
    Read(e, "encoder", "dropout", c.dropout);
  }
  if (j.contains("ssl")) {
    const json& s = j.at("ssl");
    CheckKeys(s, "ssl",
              {"margin", "window_radius", "alpha", "beta", "crop_length", "negative_probability",
               "learning_rate", "batch_size", "recrop_each_epoch", "freeze_text_encoder", "steps",
               "checkpoint_every"});
    SslConfig& c = config.ssl;
    Read(s, "ssl", "margin", c.margin);
    Read(s, "ssl", "window_radius", c.window_radius);
    Read(s, "ssl", "alpha", c.alpha);
    Read(s, "ssl", "beta", c.beta);
    Read(s, "ssl", "crop_length", c.crop_length);
    Read(s, "ssl", "negative_probability", c.negative_probability);
    Read(s, "ssl", "learning_rate", c.learning_rate);
    Read(s, "ssl", "batch_size", c.batch_size);
    Read(s, "ssl", "recrop_each_epoch", c.recrop_each_epoch);
    Read(s, "ssl", "freeze_text_encoder", c.freeze_text_encoder);
    Read(s, "ssl", "steps", config.ssl_steps);
    Read(s, "ssl", "checkpoint_every", config.checkpoint_every);
  }
  if (j.contains("summarizer")) {
    const json& s = j.at("summarizer");
    CheckKeys(s, "summarizer",
              {"stages", "use_text", "max_frames", "learning_rate", "epochs", "batch_size",
               "folds", "recrop_each_epoch"});
    SummarizerConfig& c = config.summarizer;
    Read(s, "summarizer", "stages", c.stages);
    Read(s, "summarizer", "use_text", c.use_text);
    Read(s, "summarizer", "max_frames", c.max_frames);
    Read(s, "summarizer", "learning_rate", c.learning_rate);
    Read(s, "summarizer", "epochs", c.epochs);
    Read(s, "summarizer", "batch_size", c.batch_size);
    Read(s, "summarizer", "folds", c.folds);
    Read(s, "summarizer", "recrop_each_epoch", c.recrop_each_epoch);
  }
  if (j.contains("evaluation")) {
    const json& s = j.at("evaluation");
    CheckKeys(s, "evaluation", {"budget", "kts_penalty", "kts_max_change_points", "shot_value"});
    EvaluationOptions& c = config.evaluation;
    Read(s, "evaluation", "budget", c.budget);
    Read(s, "evaluation", "kts_penalty", c.kts.penalty);
    Read(s, "evaluation", "kts_max_change_points", c.kts.max_change_points);
    if (s.contains("shot_value")) {
      std::string v;
      Read(s, "evaluation", "shot_value", v);
      if (v == "mean") {
        c.shot_value = ShotValue::kMeanScore;
      } else if (v == "mean_times_length") {
        c.shot_value = ShotValue::kMeanTimesLength;
      } else {
        throw ConfigError("evaluation.shot_value must be \"mean\" or \"mean_times_length\"");
      }
    }
  }
}

void ApplyConfigFile(RunConfig& config, const std::string& path) {
  std::string text;
  try {
    text = ReadFileText(path);
  } catch (const Error& e) {
    throw ConfigError(std::string("cannot read config: ") + e.what());
  }
  ApplyConfigJson(config, text, path);
}

}  // namespace spvs::cli
