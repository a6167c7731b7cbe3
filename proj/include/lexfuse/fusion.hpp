#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lexfuse/embedding.hpp"
#include "lexfuse/kernels.hpp"
#include "lexfuse/keywords.hpp"
#include "lexfuse/statute_store.hpp"

namespace lexfuse {

// Embedded statutes: row j is corpus record j. Immutable once built; every
// norm is strictly positive.
class LawMatrix {
 public:
  LawMatrix() = default;
  // Validates shape, finiteness and that norms[j] > 0.
  LawMatrix(std::size_t dim, std::vector<double> values, std::vector<double> norms, std::uint64_t corpus_fingerprint);

  std::size_t dim() const { return dim_; }
  std::size_t rows() const { return norms_.size(); }
  std::span<const double> row(std::size_t j) const { return {values_.data() + j * dim_, dim_}; }
  double norm(std::size_t j) const { return norms_[j]; }
  std::span<const double> values() const { return values_; }
  std::span<const double> norms() const { return norms_; }
  std::uint64_t corpus_fingerprint() const { return corpus_fingerprint_; }

  kernels::MatrixView view() const { return {values_, norms_, rows(), dim_}; }

  friend bool operator==(const LawMatrix&, const LawMatrix&) = default;

 private:
  std::size_t dim_ = 0;
  std::vector<double> values_;
  std::vector<double> norms_;
  std::uint64_t corpus_fingerprint_ = 0;
};

// Embeds every statute. A statute whose embedding has zero norm cannot be
// scored, and fails the build with an error naming it.
LawMatrix build_index(const StatuteCorpus& corpus, Embedder& embedder);

double l2_norm(std::span<const double> v);

// a.b / (|a||b|) clamped into [-1, 1]. Throws kInvalidInput on a dim
// mismatch or a zero-norm operand.
double cosine_similarity(std::span<const double> a, std::span<const double> b);

// keyword/|keyword| + alpha * query/|query|, not renormalized. The query is
// ignored when alpha == 0. Throws kInvalidInput on a zero-norm keyword, a
// zero-norm query with alpha > 0, negative alpha, or a dim mismatch.
std::vector<double> fuse(std::span<const double> keyword, std::span<const double> query, double alpha);

enum class RetrievalMode { kFusion, kQueryOnly };
std::string_view to_string(RetrievalMode mode);
RetrievalMode retrieval_mode_from_string(std::string_view name);

enum class ZeroKeywordPolicy { kSkip, kError };

struct RetrievalConfig {
  double alpha = 1.0;
  std::size_t top_k = 5;
  RetrievalMode mode = RetrievalMode::kFusion;
  // Divide accumulated fusion scores by the number of keywords scored.
  bool mean_scores = false;
  ZeroKeywordPolicy zero_keyword = ZeroKeywordPolicy::kSkip;
  int threads = 1;

  void validate() const;
};

struct ScoreVector {
  std::vector<double> scores;
  // Mode actually used; fusion degrades to query-only when every keyword
  // embedding is zero.
  RetrievalMode effective_mode = RetrievalMode::kFusion;
  std::size_t keywords_scored = 0;
  std::vector<std::string> warnings;
};

// Fusion mode: scores[j] = sum_i cos(fuse(k_i, s, alpha), l_j).
// Query-only mode: scores[j] = cos(s, l_j).
// Runs serially when cfg.threads == 1, otherwise through scan_parallel.
ScoreVector score_corpus(const KeywordEmbeddings& keywords, const EmbeddingVector& query, const LawMatrix& laws,
                         const RetrievalConfig& cfg);

// Row-parallel scan with `threads` workers. Per-row results are bitwise
// equal to the serial path. Throws kInvalidInput when threads < 1.
ScoreVector scan_parallel(const KeywordEmbeddings& keywords, const EmbeddingVector& query, const LawMatrix& laws,
                          const RetrievalConfig& cfg, int threads);

struct ScoredHit {
  std::string statute_id;
  std::size_t row = 0;
  double score = 0.0;
  std::size_t rank = 0;  // 1-based

  friend bool operator==(const ScoredHit&, const ScoredHit&) = default;
};

// min(k, M) hits by descending score; equal scores rank the lower row first.
std::vector<ScoredHit> top_k(std::span<const double> scores, std::size_t k, const StatuteCorpus& corpus);

struct RetrievalResult {
  std::vector<ScoredHit> hits;
  KeywordSet keywords;
  RetrievalMode effective_mode = RetrievalMode::kFusion;
  std::vector<std::string> warnings;
};

// extract -> embed -> score -> rank over a built index. Errors are re-thrown
// with the failing stage name (extract, embed-keywords, embed-query, score).
class Retriever {
 public:
  // Throws kStaleIndex when `laws` was not built from `corpus`, kConfig when
  // the embedder dim differs from the index dim.
  Retriever(const StatuteCorpus& corpus, const LawMatrix& laws, Embedder& embedder, KeywordExtractor& extractor,
            RetrievalConfig config);

  RetrievalResult retrieve(std::string_view query) const;
  RetrievalResult retrieve(std::string_view query, const RetrievalConfig& config) const;

  const RetrievalConfig& config() const { return config_; }
  const StatuteCorpus& corpus() const { return corpus_; }

 private:
  const StatuteCorpus& corpus_;
  const LawMatrix& laws_;
  Embedder& embedder_;
  KeywordExtractor& extractor_;
  RetrievalConfig config_;
};

}  // namespace lexfuse
