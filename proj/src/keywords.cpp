#include "lexfuse/keywords.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <sstream>

#include "lexfuse/error.hpp"
#include "lexfuse/text.hpp"

namespace lexfuse {

std::string_view to_string(ExtractorKind kind) {
  return kind == ExtractorKind::kRemote ? "remote" : "lexical";
}

ExtractorKind extractor_kind_from_string(std::string_view name) {
  if (name == "lexical") return ExtractorKind::kLexical;
  if (name == "remote") return ExtractorKind::kRemote;
  throw Error(ErrorKind::kConfig, "unknown extractor kind '" + std::string(name) + "'");
}

void ExtractorConfig::validate() const {
  if (max_keywords < 1) throw Error(ErrorKind::kConfig, "max_keywords must be >= 1");
  if (kind == ExtractorKind::kRemote && endpoint.empty()) {
    throw Error(ErrorKind::kConfig, "remote extractor requires an endpoint");
  }
}

LexicalExtractor::LexicalExtractor(ExtractorConfig config) : config_(std::move(config)) {
  config_.validate();
}

KeywordSet LexicalExtractor::extract(std::string_view query) {
  if (text::is_blank(query)) throw Error(ErrorKind::kInvalidInput, "query is empty");

  std::vector<std::string> candidates;
  std::unordered_set<std::string> seen;
  for (auto& token : text::tokenize(query)) {
    if (config_.stopwords.contains(token)) continue;
    if (!config_.allow_duplicates && !seen.insert(token).second) continue;
    candidates.push_back(std::move(token));
  }

  KeywordSet out;
  if (candidates.empty()) {
    out.keywords.push_back(text::collapse_whitespace(query));
    out.fell_back_to_query = true;
    return out;
  }
  if (candidates.size() <= config_.max_keywords) {
    out.keywords = std::move(candidates);
    return out;
  }

  std::vector<double> weight(candidates.size());
  if (config_.idf_table && !config_.idf_table->empty()) {
    double unseen = -INFINITY;
    for (const auto& [token, w] : *config_.idf_table) unseen = std::max(unseen, w);
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      auto it = config_.idf_table->find(candidates[i]);
      weight[i] = it == config_.idf_table->end() ? unseen : it->second;
    }
  } else {
    for (std::size_t i = 0; i < candidates.size(); ++i) weight[i] = static_cast<double>(candidates[i].size());
  }

  std::vector<std::size_t> order(candidates.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return weight[a] > weight[b]; });
  order.resize(config_.max_keywords);
  std::sort(order.begin(), order.end());
  for (std::size_t i : order) out.keywords.push_back(std::move(candidates[i]));
  return out;
}

std::unique_ptr<KeywordExtractor> make_extractor(const ExtractorConfig& config) {
  config.validate();
  if (config.kind == ExtractorKind::kRemote) return std::make_unique<RemoteExtractor>(config);
  return std::make_unique<LexicalExtractor>(config);
}

KeywordSet extract_keywords(std::string_view query, const ExtractorConfig& config) {
  return make_extractor(config)->extract(query);
}

std::unordered_set<std::string> load_stopwords(std::istream& in) {
  std::unordered_set<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    for (auto& token : text::tokenize(line)) words.insert(std::move(token));
  }
  return words;
}

std::unordered_set<std::string> load_stopwords_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open stopword file '" + path + "'");
  return load_stopwords(in);
}

const std::unordered_set<std::string>& default_stopwords() {
  static const std::unordered_set<std::string> words = {
      "a",     "about", "an",    "and",   "any",  "are",   "as",    "at",    "be",    "been",
      "but",   "by",    "can",   "could", "did",  "do",    "does",  "for",   "from",  "had",
      "has",   "have",  "he",    "her",   "his",  "how",   "i",     "if",    "in",    "into",
      "is",    "it",    "its",   "me",    "my",   "no",    "not",   "of",    "on",    "or",
      "our",   "she",   "should", "so",   "that", "the",   "their", "them",  "then",  "there",
      "these", "they",  "this",  "to",    "was",  "we",    "were",  "what",  "when",  "where",
      "which", "who",   "why",   "will",  "with", "would", "you",   "your",
  };
  return words;
}

IdfTable load_idf_table(std::istream& in) {
  IdfTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::is_blank(line)) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw Error(ErrorKind::kParse, "idf table line " + std::to_string(line_no) + ": expected token<TAB>weight");
    }
    const std::string token = line.substr(0, tab);
    double weight = 0.0;
    std::istringstream ws(line.substr(tab + 1));
    if (!(ws >> weight) || !std::isfinite(weight)) {
      throw Error(ErrorKind::kParse, "idf table line " + std::to_string(line_no) + ": bad weight");
    }
    table.insert_or_assign(token, weight);
  }
  return table;
}

IdfTable load_idf_table_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open idf table '" + path + "'");
  return load_idf_table(in);
}

IdfTable compute_idf(const StatuteCorpus& corpus) {
  std::unordered_map<std::string, std::size_t> df;
  for (const auto& rec : corpus.records()) {
    std::unordered_set<std::string> unique;
    for (auto& token : text::tokenize(rec.text)) unique.insert(std::move(token));
    for (const auto& token : unique) ++df[token];
  }
  const double m = static_cast<double>(corpus.size());
  IdfTable table;
  for (const auto& [token, count] : df) {
    table.emplace(token, std::log((m + 1.0) / (static_cast<double>(count) + 1.0)) + 1.0);
  }
  return table;
}

std::vector<std::size_t> KeywordEmbeddings::zero_norm_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    if (vectors[i].norm() == 0.0) out.push_back(i);
  }
  return out;
}

KeywordEmbeddings embed_keywords(const KeywordSet& keywords, Embedder& embedder) {
  KeywordEmbeddings out;
  out.vectors.reserve(keywords.size());
  for (const auto& kw : keywords.keywords) {
    try {
      out.vectors.push_back(embedder.embed_text(kw));
    } catch (const Error& e) {
      throw Error(e.kind(), "embedding keyword '" + kw + "': " + e.what());
    }
    out.source_keywords.push_back(kw);
  }
  return out;
}

}  // namespace lexfuse
