#include "spvs/text.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>

#include "spvs/errors.h"

namespace spvs {
namespace {

bool IsWordChar(unsigned char c) {
  return std::isalnum(c) || c == '\'' || c == '-';
}

bool IsVowel(char c) { return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u'; }

bool HasVowel(std::string_view s) {
  return std::any_of(s.begin(), s.end(), [](char c) { return IsVowel(c) || c == 'y'; });
}

bool EndsWith(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

bool IsUrlOrEmail(std::string_view token) {
  std::string lower(token);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower.find("://") != std::string::npos) return true;
  if (lower.rfind("www.", 0) == 0) return true;
  const auto at = lower.find('@');
  if (at != std::string::npos && at > 0 && lower.find('.', at) != std::string::npos) return true;
  return false;
}

const std::unordered_map<std::string_view, std::string_view>& Irregulars() {
  static const std::unordered_map<std::string_view, std::string_view> table = {
      {"children", "child"}, {"men", "man"},     {"women", "woman"}, {"people", "person"},
      {"mice", "mouse"},     {"feet", "foot"},   {"teeth", "tooth"}, {"geese", "goose"},
      {"was", "be"},         {"were", "be"},     {"is", "be"},       {"are", "be"},
      {"been", "be"},        {"am", "be"},       {"has", "have"},    {"had", "have"},
      {"did", "do"},         {"does", "do"},     {"went", "go"},     {"gone", "go"},
      {"ran", "run"},        {"made", "make"},   {"took", "take"},   {"saw", "see"},
      {"seen", "see"},       {"got", "get"},     {"came", "come"},   {"knew", "know"},
      {"better", "good"},    {"best", "good"},   {"ate", "eat"},     {"wrote", "write"},
  };
  return table;
}

// Words the suffix rules must leave alone.
bool Protected(std::string_view w) {
  return EndsWith(w, "ss") || EndsWith(w, "us") || EndsWith(w, "is") || w.size() <= 3;
}

std::string TrimEdges(std::string_view w) {
  std::size_t b = 0, e = w.size();
  while (b < e && (w[b] == '\'' || w[b] == '-')) ++b;
  while (e > b && (w[e - 1] == '\'' || w[e - 1] == '-')) --e;
  return std::string(w.substr(b, e - b));
}

// Strips a doubled final consonant left behind by -ing/-ed ("runn" -> "run").
std::string Undouble(std::string stem) {
  const std::size_t n = stem.size();
  if (n >= 3 && stem[n - 1] == stem[n - 2] && !IsVowel(stem[n - 1]) &&
      std::string_view("lsz").find(stem[n - 1]) == std::string_view::npos) {
    stem.pop_back();
  }
  return stem;
}

// One rewriting step; returns the input unchanged at a fixpoint.
std::string LemmaStep(const std::string& w) {
  const std::string trimmed = TrimEdges(w);
  if (trimmed != w) return trimmed;
  if (auto it = Irregulars().find(w); it != Irregulars().end()) return std::string(it->second);
  if (EndsWith(w, "'s")) return w.substr(0, w.size() - 2);
  if (Protected(w)) return w;
  if (EndsWith(w, "ies") && w.size() > 4) return w.substr(0, w.size() - 3) + "y";
  if ((EndsWith(w, "sses") || EndsWith(w, "shes") || EndsWith(w, "ches") || EndsWith(w, "xes") ||
       EndsWith(w, "zes")) &&
      w.size() > 4) {
    return w.substr(0, w.size() - 2);
  }
  if (EndsWith(w, "ing") && w.size() >= 6) {
    const std::string stem = w.substr(0, w.size() - 3);
    if (HasVowel(stem)) return Undouble(stem);
  }
  if (EndsWith(w, "ed") && w.size() >= 5 && !EndsWith(w, "eed")) {
    const std::string stem = w.substr(0, w.size() - 2);
    if (HasVowel(stem)) return Undouble(stem);
  }
  if (EndsWith(w, "s") && w.size() >= 4 && !EndsWith(w, "'s")) {
    const char prev = w[w.size() - 2];
    if (std::isalpha(static_cast<unsigned char>(prev)) && prev != 's') return w.substr(0, w.size() - 1);
  }
  return w;
}

}  // namespace

std::string Lemmatize(std::string_view word) {
  std::string current(word);
  for (int guard = 0; guard < 64; ++guard) {
    std::string next = LemmaStep(current);
    if (next == current) return current;
    current = std::move(next);
  }
  return current;
}

std::vector<std::string> CleanText(std::string_view raw) {
  // Whitespace-delimited pass drops URLs and e-mail addresses; everything
  // else is split on characters outside the word alphabet.
  std::vector<std::string> words;
  std::size_t i = 0;
  while (i < raw.size()) {
    while (i < raw.size() && std::isspace(static_cast<unsigned char>(raw[i]))) ++i;
    std::size_t j = i;
    while (j < raw.size() && !std::isspace(static_cast<unsigned char>(raw[j]))) ++j;
    if (j == i) break;
    const std::string_view token = raw.substr(i, j - i);
    i = j;
    if (IsUrlOrEmail(token)) continue;
    std::string piece;
    auto flush = [&] {
      if (piece.empty()) return;
      std::string lemma = Lemmatize(piece);
      if (!lemma.empty()) words.push_back(std::move(lemma));
      piece.clear();
    };
    for (unsigned char c : token) {
      if (c < 0x80 && IsWordChar(c)) {
        piece.push_back(static_cast<char>(std::tolower(c)));
      } else {
        flush();
      }
    }
    flush();
  }
  return words;
}

FieldLimits LimitsFor(TextMode mode) {
  return mode == TextMode::kPretrain ? kPretrainLimits : kSummarizeLimits;
}

std::size_t TokenLength(const FieldLimits& limits) {
  std::size_t n = 1 + 3;
  for (std::size_t l : limits) n += l;
  return n;
}

Vocabulary::Vocabulary() : words_{"[PAD]", "[CLS]", "[SEP]", "[UNK]"} {
  for (int i = 0; i < kReservedTokens; ++i) ids_[words_[static_cast<std::size_t>(i)]] = i;
}

Vocabulary Vocabulary::Build(const std::vector<const TextBundle*>& bundles, std::size_t max_size) {
  std::map<std::string, std::size_t> counts;
  for (const TextBundle* b : bundles) {
    for (const auto* field : {&b->category, &b->query, &b->title, &b->description}) {
      for (const std::string& w : *field) ++counts[w];
    }
  }
  std::vector<std::pair<std::string, std::size_t>> sorted(counts.begin(), counts.end());
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::string> words;
  for (const auto& [w, n] : sorted) {
    if (max_size && words.size() + kReservedTokens >= max_size) break;
    words.push_back(w);
  }
  return FromWords(words);
}

Vocabulary Vocabulary::FromWords(const std::vector<std::string>& words) {
  Vocabulary v;
  for (const std::string& w : words) {
    if (v.ids_.contains(w)) throw VocabularyError("duplicate vocabulary entry " + w);
    v.ids_[w] = static_cast<int>(v.words_.size());
    v.words_.push_back(w);
  }
  return v;
}

int Vocabulary::Id(std::string_view word) const {
  auto it = ids_.find(word);
  return it == ids_.end() ? kUnkId : it->second;
}

const std::string& Vocabulary::Word(int id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= words_.size()) {
    throw VocabularyError("token id " + std::to_string(id) + " outside vocabulary");
  }
  return words_[static_cast<std::size_t>(id)];
}

std::size_t TokenSequence::WordCount() const {
  return static_cast<std::size_t>(std::count(is_word.begin(), is_word.end(), 1));
}

TokenSequence AssembleTokens(const TextBundle& bundle, const Vocabulary& vocab,
                             const FieldLimits& limits) {
  TokenSequence seq;
  seq.ids.reserve(TokenLength(limits));
  auto push = [&seq](int id, bool word) {
    seq.ids.push_back(id);
    seq.is_word.push_back(word ? 1 : 0);
  };
  push(kClsId, false);
  const std::vector<std::string>* fields[] = {&bundle.category, &bundle.query, &bundle.title,
                                              &bundle.description};
  for (std::size_t f = 0; f < 4; ++f) {
    if (f > 0) push(kSepId, false);
    const auto& words = *fields[f];
    for (std::size_t i = 0; i < limits[f]; ++i) {
      if (i < words.size()) {
        push(vocab.Id(words[i]), true);
      } else {
        push(kPadId, false);
      }
    }
  }
  return seq;
}

EmbeddingTable LoadWordEmbeddings(const std::filesystem::path& path, const Vocabulary& vocab,
                                  std::size_t dim, std::vector<double> initial) {
  if (initial.size() != vocab.size() * dim) {
    throw DimensionError("word embeddings: initial table has " + std::to_string(initial.size()) +
                         " values, expected " + std::to_string(vocab.size()) + " x " +
                         std::to_string(dim));
  }
  std::ifstream in(path);
  if (!in) throw DataError("cannot open word embeddings " + path.string());
  EmbeddingTable table{std::move(initial), 0};
  std::set<std::string> seen;
  std::string line;
  for (std::size_t line_no = 1; std::getline(in, line); ++line_no) {
    std::istringstream fields(line);
    std::string word;
    if (!(fields >> word)) continue;
    const std::string where = path.string() + ":" + std::to_string(line_no) + ": ";
    std::vector<double> row;
    for (std::string v; fields >> v;) {
      std::size_t used = 0;
      double x = 0;
      try {
        x = std::stod(v, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != v.size() || !std::isfinite(x)) {
        throw FormatError(where + "'" + v + "' is not a finite number");
      }
      row.push_back(x);
    }
    if (row.size() != dim) {
      throw FormatError(where + "expected " + std::to_string(dim) + " values after '" + word +
                        "', found " + std::to_string(row.size()));
    }
    if (!seen.insert(word).second) throw FormatError(where + "duplicate word '" + word + "'");
    const int id = vocab.Id(word);
    if (id == kUnkId && word != "[UNK]") continue;
    std::copy(row.begin(), row.end(), table.values.begin() + static_cast<std::ptrdiff_t>(id * dim));
    ++table.matched;
  }
  return table;
}

}  // namespace spvs
