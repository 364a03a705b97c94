#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "spvs/tokens.h"

namespace spvs {

// Lowercased, lemmatized words with URLs, e-mail addresses and symbols
// removed. Words keep only [a-z0-9] plus internal apostrophes and hyphens.
std::vector<std::string> CleanText(std::string_view raw);

// Rule-table lemmatizer (plural -s/-es/-ies, -ing/-ed with consonant
// doubling, a short irregular list). Applied to a fixpoint, so it is
// idempotent.
std::string Lemmatize(std::string_view word);

struct TextBundle {
  std::vector<std::string> category;
  std::vector<std::string> query;
  std::vector<std::string> title;
  std::vector<std::string> description;
};

enum class TextMode { kPretrain, kSummarize };

// Per-field word limits in the order category, query, title, description.
using FieldLimits = std::array<std::size_t, 4>;
inline constexpr FieldLimits kPretrainLimits = {3, 3, 10, 50};
inline constexpr FieldLimits kSummarizeLimits = {1, 3, 10, 15};
FieldLimits LimitsFor(TextMode mode);
// 1 + sum(limits) + 3 separators.
std::size_t TokenLength(const FieldLimits& limits);

class Vocabulary {
 public:
  Vocabulary();
  // Reserved ids first, then words sorted by descending count, ties broken
  // alphabetically. max_size (0 = unlimited) includes the reserved ids.
  static Vocabulary Build(const std::vector<const TextBundle*>& bundles, std::size_t max_size = 0);
  static Vocabulary FromWords(const std::vector<std::string>& words);

  int Id(std::string_view word) const;
  const std::string& Word(int id) const;
  std::size_t size() const { return words_.size(); }
  const std::vector<std::string>& words() const { return words_; }

 private:
  std::vector<std::string> words_;
  std::map<std::string, int, std::less<>> ids_;
};

struct TokenSequence {
  std::vector<int> ids;
  // 1 where the token is a real word (not CLS/SEP/PAD).
  std::vector<std::uint8_t> is_word;

  std::size_t size() const { return ids.size(); }
  std::size_t WordCount() const;
};

// [CLS] cat [SEP] query [SEP] title [SEP] desc, each field truncated or
// right-padded with [PAD] to its limit.
TokenSequence AssembleTokens(const TextBundle& bundle, const Vocabulary& vocab,
                             const FieldLimits& limits);

struct EmbeddingTable {
  std::vector<double> values;  // vocab x dim, row-major
  std::size_t matched = 0;     // vocabulary words found in the file
};

// Reads a whitespace-separated text table with one "word v1 ... v_dim" entry
// per line; blank lines are skipped. Starting from `initial` (vocab x dim),
// rows of vocabulary words listed in the file are replaced by the file's
// vectors. Words outside the vocabulary are ignored.
EmbeddingTable LoadWordEmbeddings(const std::filesystem::path& path, const Vocabulary& vocab,
                                  std::size_t dim, std::vector<double> initial);

}  // namespace spvs
