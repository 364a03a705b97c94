#include "spvs/dataset.h"

#include <bit>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "spvs/errors.h"
#include "spvs/file_io.h"

namespace spvs {
namespace {

using nlohmann::json;

std::string JoinWords(const std::vector<std::string>& words) {
  std::string out;
  for (const auto& w : words) {
    if (!out.empty()) out.push_back(' ');
    out += w;
  }
  return out;
}

class FieldError : public std::runtime_error {
 public:
  FieldError(std::string field, const std::string& message)
      : std::runtime_error(message), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

const json& Require(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) throw FieldError(key, "missing required field");
  return *it;
}

std::vector<std::uint8_t> EncodeBlob(const std::vector<float>& values) {
  std::vector<std::uint8_t> bytes;
  bytes.reserve(values.size() * 4);
  for (float v : values) {
    const auto bits = std::bit_cast<std::uint32_t>(v);
    for (int i = 0; i < 4; ++i) bytes.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
  }
  return bytes;
}

std::vector<float> DecodeBlob(const std::vector<std::uint8_t>& bytes) {
  std::vector<float> values(bytes.size() / 4);
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::uint32_t bits = 0;
    for (int b = 0; b < 4; ++b) bits |= static_cast<std::uint32_t>(bytes[4 * i + b]) << (8 * b);
    values[i] = std::bit_cast<float>(bits);
  }
  return values;
}

std::filesystem::path BlobPath(const std::filesystem::path& dataset, const std::string& id) {
  return dataset.parent_path() / (dataset.stem().string() + "." + id + ".f32");
}

json RecordToJson(const DatasetRecord& r, const std::filesystem::path& path,
                  FeatureStorage storage) {
  json j;
  j["schema"] = kDatasetSchemaVersion;
  j["id"] = r.id;
  j["fps"] = r.fps_original;
  j["n_frames"] = r.original_frames;
  j["picks"] = r.picks;
  if (storage == FeatureStorage::kInline) {
    json rows = json::array();
    for (std::size_t t = 0; t < r.frames; ++t) {
      json row = json::array();
      for (std::size_t d = 0; d < r.dim; ++d) row.push_back(r.features[t * r.dim + d]);
      rows.push_back(std::move(row));
    }
    j["features"] = std::move(rows);
  } else {
    const auto blob = BlobPath(path, r.id);
    WriteFileAtomic(blob, EncodeBlob(r.features));
    j["features"] = {{"blob", blob.filename().string()}, {"shape", {r.frames, r.dim}}};
  }
  j["text"] = {{"category", JoinWords(r.text.category)},
               {"query", JoinWords(r.text.query)},
               {"title", JoinWords(r.text.title)},
               {"description", JoinWords(r.text.description)}};
  j["annotations"] = r.annotations;
  if (!r.user_summaries.empty()) j["user_summaries"] = r.user_summaries;
  if (!r.planted.empty()) j["planted"] = r.planted;
  return j;
}

DatasetRecord RecordFromJson(const json& j, const std::filesystem::path& path) {
  DatasetRecord r;
  if (!j.is_object()) throw FieldError("", "record must be a JSON object");
  const json& schema = Require(j, "schema");
  if (!schema.is_number_integer() || schema.get<int>() != kDatasetSchemaVersion) {
    throw FieldError("schema", "unsupported schema version " + schema.dump());
  }
  try {
    r.id = Require(j, "id").get<std::string>();
  } catch (const json::exception&) {
    throw FieldError("id", "expected a string");
  }
  if (r.id.empty()) throw FieldError("id", "must be non-empty");

  const json& feats = Require(j, "features");
  if (feats.is_array()) {
    r.frames = feats.size();
    if (r.frames == 0) throw FieldError("features", "no frames");
    r.dim = feats[0].is_array() ? feats[0].size() : 0;
    if (r.dim == 0) throw FieldError("features[0]", "expected a non-empty array of numbers");
    r.features.reserve(r.frames * r.dim);
    for (std::size_t t = 0; t < r.frames; ++t) {
      const std::string fp = "features[" + std::to_string(t) + "]";
      if (!feats[t].is_array() || feats[t].size() != r.dim) {
        throw FieldError(fp, "expected " + std::to_string(r.dim) + " numbers");
      }
      for (std::size_t d = 0; d < r.dim; ++d) {
        if (!feats[t][d].is_number()) {
          throw FieldError(fp + "[" + std::to_string(d) + "]", "expected a number");
        }
        r.features.push_back(static_cast<float>(feats[t][d].get<double>()));
      }
    }
  } else if (feats.is_object()) {
    const json& blob = Require(feats, "blob");
    const json& shape = Require(feats, "shape");
    if (!blob.is_string()) throw FieldError("features.blob", "expected a relative path");
    if (!shape.is_array() || shape.size() != 2 || !shape[0].is_number_unsigned() ||
        !shape[1].is_number_unsigned()) {
      throw FieldError("features.shape", "expected [frames, dim]");
    }
    r.frames = shape[0].get<std::size_t>();
    r.dim = shape[1].get<std::size_t>();
    const auto blob_path = path.parent_path() / blob.get<std::string>();
    std::vector<std::uint8_t> bytes;
    try {
      bytes = ReadFileBytes(blob_path);
    } catch (const DataError& e) {
      throw FieldError("features.blob", e.what());
    }
    if (bytes.size() != r.frames * r.dim * 4) {
      throw FieldError("features.blob", blob_path.string() + " holds " +
                                            std::to_string(bytes.size()) + " bytes, expected " +
                                            std::to_string(r.frames * r.dim * 4));
    }
    r.features = DecodeBlob(bytes);
  } else {
    throw FieldError("features", "expected nested arrays or {blob, shape}");
  }

  r.fps_original = j.value("fps", 2.0);
  if (j.contains("picks")) {
    try {
      r.picks = j["picks"].get<std::vector<std::int64_t>>();
    } catch (const json::exception&) {
      throw FieldError("picks", "expected an array of integers");
    }
  } else {
    for (std::size_t t = 0; t < r.frames; ++t) r.picks.push_back(static_cast<std::int64_t>(t));
  }
  r.original_frames = j.value("n_frames", r.picks.empty() ? 0 : r.picks.back() + 1);

  if (j.contains("text")) {
    const json& text = j["text"];
    if (!text.is_object()) throw FieldError("text", "expected an object");
    auto field = [&](const char* key) {
      if (!text.contains(key)) return std::vector<std::string>{};
      if (!text[key].is_string()) throw FieldError(std::string("text.") + key, "expected a string");
      return CleanText(text[key].get<std::string>());
    };
    r.text.category = field("category");
    r.text.query = field("query");
    r.text.title = field("title");
    r.text.description = field("description");
  }

  if (j.contains("annotations")) {
    const json& ann = j["annotations"];
    if (!ann.is_array()) throw FieldError("annotations", "expected an array of score arrays");
    for (std::size_t a = 0; a < ann.size(); ++a) {
      const std::string fp = "annotations[" + std::to_string(a) + "]";
      if (!ann[a].is_array()) throw FieldError(fp, "expected an array of numbers");
      std::vector<double> scores;
      for (const json& v : ann[a]) {
        if (!v.is_number()) throw FieldError(fp, "expected numbers");
        scores.push_back(v.get<double>());
      }
      if (scores.size() != r.frames) {
        throw FieldError(fp, "length " + std::to_string(scores.size()) + " != frame count " +
                                 std::to_string(r.frames));
      }
      r.annotations.push_back(std::move(scores));
    }
  }
  if (j.contains("user_summaries")) {
    try {
      r.user_summaries = j["user_summaries"].get<std::vector<std::vector<std::uint8_t>>>();
    } catch (const json::exception&) {
      throw FieldError("user_summaries", "expected arrays of 0/1");
    }
  }
  if (j.contains("planted")) {
    try {
      r.planted = j["planted"].get<std::vector<double>>();
    } catch (const json::exception&) {
      throw FieldError("planted", "expected an array of numbers");
    }
  }
  return r;
}

}  // namespace

Tensor DatasetRecord::FeatureTensor() const {
  return Tensor::FromData({frames, dim}, std::vector<double>(features.begin(), features.end()));
}

std::vector<double> DatasetRecord::MeanAnnotation() const {
  if (annotations.empty()) throw DataError("video " + id + " has no annotations");
  std::vector<double> mean(frames, 0.0);
  for (const auto& a : annotations)
    for (std::size_t t = 0; t < frames; ++t) mean[t] += a[t];
  for (double& m : mean) m /= static_cast<double>(annotations.size());
  return mean;
}

void DatasetRecord::Validate() const {
  auto fail = [this](const std::string& msg) { throw DataError("video " + id + ": " + msg); };
  if (frames == 0 || dim == 0) fail("empty feature matrix");
  if (features.size() != frames * dim) fail("feature payload does not match shape");
  for (float v : features)
    if (!std::isfinite(v)) fail("non-finite feature value");
  if (picks.size() != frames) {
    fail("picks has " + std::to_string(picks.size()) + " entries for " + std::to_string(frames) +
         " frames");
  }
  for (std::size_t i = 0; i < picks.size(); ++i) {
    if (picks[i] < 0 || (i > 0 && picks[i] <= picks[i - 1])) fail("picks not strictly increasing");
  }
  if (!picks.empty() && original_frames <= picks.back()) {
    fail("n_frames must exceed the last pick");
  }
  for (std::size_t a = 0; a < annotations.size(); ++a) {
    if (annotations[a].size() != frames) {
      fail("annotation " + std::to_string(a) + " has length " +
           std::to_string(annotations[a].size()) + ", expected " + std::to_string(frames));
    }
  }
  for (std::size_t a = 0; a < user_summaries.size(); ++a) {
    if (user_summaries[a].size() != static_cast<std::size_t>(original_frames)) {
      fail("user summary " + std::to_string(a) + " does not cover n_frames");
    }
  }
  if (!planted.empty() && planted.size() != frames) fail("planted scores length mismatch");
}

void SaveDataset(const std::filesystem::path& path, const std::vector<DatasetRecord>& records,
                 FeatureStorage storage) {
  std::string out;
  for (const DatasetRecord& r : records) {
    r.Validate();
    out += RecordToJson(r, path, storage).dump();
    out.push_back('\n');
  }
  WriteFileAtomic(path, out);
}

std::vector<DatasetRecord> LoadDataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open dataset " + path.string());
  std::vector<DatasetRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path.string() + ":" + std::to_string(line_no);
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw FormatError(where + ": invalid JSON: " + e.what());
    }
    try {
      DatasetRecord r = RecordFromJson(j, path);
      r.Validate();
      records.push_back(std::move(r));
    } catch (const FieldError& e) {
      throw FormatError(where + ": field '" + e.field() + "': " + e.what());
    } catch (const DataError& e) {
      throw DataError(where + ": " + e.what());
    }
  }
  return records;
}

SubsampleResult Subsample(const std::vector<float>& features, std::size_t frames,
                          std::size_t dim, double fps_original) {
  SubsampleResult result;
  if (fps_original < 2.0) {
    Warn("frame rate " + std::to_string(fps_original) + " below 2 FPS; keeping every frame");
    result.features = features;
    result.frames = frames;
    for (std::size_t t = 0; t < frames; ++t) result.picks.push_back(static_cast<std::int64_t>(t));
    return result;
  }
  const auto stride = static_cast<std::size_t>(std::llround(fps_original / 2.0));
  for (std::size_t t = 0; t < frames; t += stride) {
    result.picks.push_back(static_cast<std::int64_t>(t));
    result.features.insert(result.features.end(),
                           features.begin() + static_cast<std::ptrdiff_t>(t * dim),
                           features.begin() + static_cast<std::ptrdiff_t>((t + 1) * dim));
  }
  result.frames = result.picks.size();
  return result;
}

}  // namespace spvs
