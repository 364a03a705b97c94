#include "spvs/dumps.h"

#include <json.hpp>
#include <sstream>

#include "spvs/errors.h"
#include "spvs/file_io.h"
#include "spvs/tokens.h"

namespace spvs {
namespace {

using nlohmann::json;
using ordered = nlohmann::ordered_json;

ordered Optional(const std::optional<double>& v) { return v ? ordered(*v) : ordered(nullptr); }

std::optional<double> ReadOptional(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}

ordered SummaryToJson(const MetricSummary& m) {
  ordered j;
  j["tau"] = Optional(m.tau);
  j["rho"] = Optional(m.rho);
  j["f"] = Optional(m.f);
  j["tau_planted"] = Optional(m.tau_planted);
  j["videos"] = m.videos;
  return j;
}

template <typename Fn>
auto Guard(const std::string& where, Fn fn) {
  try {
    return fn();
  } catch (const json::exception& e) {
    throw FormatError(where + ": " + e.what());
  }
}

}  // namespace

std::string ScoresToJsonLines(const std::vector<VideoScores>& scores) {
  std::string out;
  for (const VideoScores& v : scores) {
    ordered j;
    j["id"] = v.id;
    j["fold"] = v.fold;
    j["stage_scores"] = v.prediction.stage_scores;
    j["final_scores"] = v.prediction.final_scores;
    j["picks"] = v.picks;
    out += j.dump();
    out.push_back('\n');
  }
  return out;
}

std::vector<VideoScores> ParseScores(const std::string& text, const std::string& origin) {
  std::vector<VideoScores> out;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = origin + ":" + std::to_string(line_no);
    out.push_back(Guard(where, [&] {
      json j = json::parse(line);
      VideoScores v;
      v.id = j.at("id").get<std::string>();
      v.fold = j.value("fold", std::size_t{0});
      v.prediction.stage_scores = j.at("stage_scores").get<std::vector<std::vector<double>>>();
      v.prediction.final_scores = j.at("final_scores").get<std::vector<double>>();
      v.picks = j.value("picks", std::vector<std::int64_t>{});
      return v;
    }));
  }
  return out;
}

std::vector<VideoScores> LoadScores(const std::filesystem::path& path) {
  return ParseScores(ReadFileText(path), path.string());
}

std::string SegmentsToJsonLines(const std::vector<SegmentRecord>& segments) {
  std::string out;
  for (const SegmentRecord& s : segments) {
    ordered j;
    j["id"] = s.id;
    j["n_frames"] = s.segmentation.frames;
    j["change_points"] = s.segmentation.change_points;
    if (!s.shot_scores.empty()) j["shot_scores"] = s.shot_scores;
    if (s.summary) {
      std::vector<std::size_t> shots;
      for (std::size_t i = 0; i < s.summary->selected.size(); ++i) {
        if (s.summary->selected[i]) shots.push_back(i);
      }
      j["selected_shots"] = shots;
      j["budget_frames"] = s.summary->budget_frames;
      j["value"] = s.summary->value;
      j["summary_frames"] = s.summary_frames;
    }
    out += j.dump();
    out.push_back('\n');
  }
  return out;
}

std::string EvaluationReportToJson(const EvaluationReport& report,
                                   const std::vector<VideoMetrics>& videos) {
  ordered j;
  j["fold_mean"] = SummaryToJson(report.fold_mean);
  j["overall"] = SummaryToJson(report.overall);
  ordered folds = ordered::array();
  for (const MetricSummary& m : report.folds) folds.push_back(SummaryToJson(m));
  j["folds"] = folds;
  ordered per = ordered::array();
  for (const VideoMetrics& v : videos) {
    ordered e;
    e["id"] = v.id;
    e["fold"] = v.fold;
    e["tau"] = Optional(v.evaluation.metrics.mean.tau);
    e["rho"] = Optional(v.evaluation.metrics.mean.rho);
    e["f"] = Optional(v.evaluation.metrics.mean.f);
    e["tau_planted"] = Optional(v.evaluation.tau_planted);
    e["change_points"] = v.evaluation.segmentation.change_points;
    per.push_back(e);
  }
  j["videos"] = per;
  return j.dump(2) + "\n";
}

MetricSummary ParseFoldMean(const std::string& report_json) {
  return Guard("report", [&] {
    json j = json::parse(report_json).at("fold_mean");
    MetricSummary m;
    m.tau = ReadOptional(j, "tau");
    m.rho = ReadOptional(j, "rho");
    m.f = ReadOptional(j, "f");
    m.tau_planted = ReadOptional(j, "tau_planted");
    m.videos = j.value("videos", std::size_t{0});
    return m;
  });
}

std::string SslStepToJson(const SslStepReport& r) {
  ordered j;
  j["step"] = r.step;
  j["L1"] = r.terms.coarse;
  j["L2"] = r.terms.fine;
  j["L3"] = r.terms.recovery;
  j["total"] = r.terms.total;
  j["pc_accuracy"] = r.terms.accuracy;
  return j.dump();
}

std::string SslEvaluationToJson(const SslEvaluation& e) {
  ordered j;
  j["pairs"] = e.pairs;
  j["correspondence_accuracy"] = e.correspondence_accuracy;
  j["recovery_loss"] = e.recovery_loss;
  j["mean_baseline_loss"] = e.mean_baseline_loss;
  return j.dump(2) + "\n";
}

std::string AblationCsv(const std::vector<AblationRow>& rows) {
  std::ostringstream out;
  out.precision(6);
  out << std::fixed;
  out << "stages,pretrained,text,tau,rho,f,tau_planted\n";
  auto cell = [&](const std::optional<double>& v) {
    if (v) {
      out << *v;
    } else {
      out << "nan";
    }
  };
  for (const AblationRow& r : rows) {
    out << r.stages << ',' << (r.pretrained ? "yes" : "no") << ',' << (r.use_text ? "yes" : "no")
        << ',';
    cell(r.metrics.tau);
    out << ',';
    cell(r.metrics.rho);
    out << ',';
    cell(r.metrics.f);
    out << ',';
    cell(r.metrics.tau_planted);
    out << '\n';
  }
  return out.str();
}

std::filesystem::path MetaPathFor(const std::filesystem::path& checkpoint) {
  return checkpoint.string() + ".meta.json";
}

std::string ModelMetaToJson(const ModelMeta& meta) {
  const EncoderConfig& c = meta.encoder;
  ordered enc;
  enc["frame_dim"] = c.frame_dim;
  enc["word_dim"] = c.word_dim;
  enc["video_layers"] = c.video_layers;
  enc["text_layers"] = c.text_layers;
  enc["heads"] = c.heads;
  enc["ffn_dim"] = c.ffn_dim;
  enc["vocab_size"] = c.vocab_size;
  enc["max_positions"] = c.max_positions;
  enc["dropout"] = c.dropout;
  enc["stages"] = c.stages;
  ordered j;
  j["encoder"] = enc;
  j["stages"] = meta.stages;
  j["use_text"] = meta.use_text;
  j["vocabulary"] = meta.vocabulary;
  return j.dump(2) + "\n";
}

ModelMeta ParseModelMeta(const std::string& text, const std::string& origin) {
  return Guard(origin, [&] {
    json j = json::parse(text);
    const json& e = j.at("encoder");
    ModelMeta m;
    EncoderConfig& c = m.encoder;
    c.frame_dim = e.at("frame_dim").get<std::size_t>();
    c.word_dim = e.at("word_dim").get<std::size_t>();
    c.video_layers = e.at("video_layers").get<std::size_t>();
    c.text_layers = e.at("text_layers").get<std::size_t>();
    c.heads = e.at("heads").get<std::size_t>();
    c.ffn_dim = e.at("ffn_dim").get<std::size_t>();
    c.vocab_size = e.at("vocab_size").get<std::size_t>();
    c.max_positions = e.at("max_positions").get<std::size_t>();
    c.dropout = e.at("dropout").get<double>();
    c.stages = e.at("stages").get<std::size_t>();
    m.stages = j.at("stages").get<std::size_t>();
    m.use_text = j.at("use_text").get<bool>();
    m.vocabulary = j.at("vocabulary").get<std::vector<std::string>>();
    return m;
  });
}

void SaveModelMeta(const std::filesystem::path& checkpoint, const ModelMeta& meta) {
  WriteFileAtomic(MetaPathFor(checkpoint), ModelMetaToJson(meta));
}

ModelMeta LoadModelMeta(const std::filesystem::path& checkpoint) {
  const std::filesystem::path path = MetaPathFor(checkpoint);
  if (!std::filesystem::exists(path)) {
    throw DataError("missing model description " + path.string());
  }
  return ParseModelMeta(ReadFileText(path), path.string());
}

}  // namespace spvs
