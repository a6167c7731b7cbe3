#pragma once

#include <cstddef>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "lexfuse/embedding.hpp"

namespace lexfuse {

// Keywords extracted from one query, deduplicated unless the extractor was
// configured to keep duplicates. Never empty after a successful extraction.
struct KeywordSet {
  std::vector<std::string> keywords;
  // True when no content token survived and the whole query stands in.
  bool fell_back_to_query = false;

  std::size_t size() const { return keywords.size(); }
  friend bool operator==(const KeywordSet&, const KeywordSet&) = default;
};

enum class ExtractorKind { kLexical, kRemote };

std::string_view to_string(ExtractorKind kind);
ExtractorKind extractor_kind_from_string(std::string_view name);

using IdfTable = std::unordered_map<std::string, double>;

struct ExtractorConfig {
  ExtractorKind kind = ExtractorKind::kLexical;
  std::size_t max_keywords = 8;
  std::unordered_set<std::string> stopwords;
  std::optional<IdfTable> idf_table;
  // Keep repeated keywords, so each occurrence is scored separately.
  bool allow_duplicates = false;
  std::string endpoint;  // remote only
  double timeout_seconds = 30.0;

  void validate() const;
};

class KeywordExtractor {
 public:
  virtual ~KeywordExtractor() = default;
  // Throws Error(kInvalidInput) on a blank query.
  virtual KeywordSet extract(std::string_view query) = 0;
};

// Tokenizes, drops stopwords, deduplicates, and keeps at most max_keywords.
// When more candidates than max_keywords survive, they are ranked by idf
// (higher first; tokens missing from the table take the table's maximum) or,
// without a table, by byte length descending. Ties go to the earlier token.
// The kept keywords are returned in order of first appearance.
class LexicalExtractor final : public KeywordExtractor {
 public:
  explicit LexicalExtractor(ExtractorConfig config);
  KeywordSet extract(std::string_view query) override;

 private:
  ExtractorConfig config_;
};

// POST {"query": string, "max_keywords": n} -> {"keywords": [string...]}.
// The reply is deduplicated, blank entries dropped, and capped at
// max_keywords; an empty reply falls back to the whole query.
class RemoteExtractor final : public KeywordExtractor {
 public:
  explicit RemoteExtractor(ExtractorConfig config);
  KeywordSet extract(std::string_view query) override;

 private:
  ExtractorConfig config_;
};

std::unique_ptr<KeywordExtractor> make_extractor(const ExtractorConfig& config);

KeywordSet extract_keywords(std::string_view query, const ExtractorConfig& config);

// One stopword per line; lines are folded with the tokenizer so they match
// query tokens.
std::unordered_set<std::string> load_stopwords(std::istream& in);
std::unordered_set<std::string> load_stopwords_file(const std::string& path);
const std::unordered_set<std::string>& default_stopwords();

// "token<TAB>weight" per line.
IdfTable load_idf_table(std::istream& in);
IdfTable load_idf_table_file(const std::string& path);
// Smoothed idf over statute texts: ln((M + 1) / (df + 1)) + 1.
IdfTable compute_idf(const StatuteCorpus& corpus);

struct KeywordEmbeddings {
  std::vector<EmbeddingVector> vectors;
  std::vector<std::string> source_keywords;

  std::size_t size() const { return vectors.size(); }
  // Keywords whose embedding has zero norm; scoring skips these.
  std::vector<std::size_t> zero_norm_indices() const;
};

// vectors[i] == embedder.embed_text(keywords[i]). Errors name the keyword.
KeywordEmbeddings embed_keywords(const KeywordSet& keywords, Embedder& embedder);

}  // namespace lexfuse
