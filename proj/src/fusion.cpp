#include "lexfuse/fusion.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>

#include "lexfuse/error.hpp"
#include "lexfuse/text.hpp"

namespace lexfuse {

LawMatrix::LawMatrix(std::size_t dim, std::vector<double> values, std::vector<double> norms,
                     std::uint64_t corpus_fingerprint)
    : dim_(dim), values_(std::move(values)), norms_(std::move(norms)), corpus_fingerprint_(corpus_fingerprint) {
  if (dim_ == 0) throw Error(ErrorKind::kInvalidInput, "law matrix dim must be >= 1");
  if (values_.size() != norms_.size() * dim_) {
    throw Error(ErrorKind::kInvalidInput, "law matrix has " + std::to_string(values_.size()) + " values for " +
                                              std::to_string(norms_.size()) + " rows of dim " + std::to_string(dim_));
  }
  for (double v : values_) {
    if (!std::isfinite(v)) throw Error(ErrorKind::kInvalidInput, "law matrix contains a non-finite value");
  }
  for (std::size_t j = 0; j < norms_.size(); ++j) {
    if (!(norms_[j] > 0.0) || !std::isfinite(norms_[j])) {
      throw Error(ErrorKind::kInvalidInput, "law matrix row " + std::to_string(j) + " has non-positive norm");
    }
  }
}

double l2_norm(std::span<const double> v) {
  double sum = 0.0;
  for (double x : v) sum += x * x;
  return std::sqrt(sum);
}

LawMatrix build_index(const StatuteCorpus& corpus, Embedder& embedder) {
  const std::size_t dim = embedder.dim();
  auto embedded = embedder.embed_records(corpus.records());
  if (embedded.size() != corpus.size()) {
    throw Error(ErrorKind::kBuild, "embedder returned " + std::to_string(embedded.size()) + " vectors for " +
                                       std::to_string(corpus.size()) + " statutes");
  }
  std::vector<double> values;
  values.reserve(corpus.size() * dim);
  std::vector<double> norms;
  norms.reserve(corpus.size());
  for (std::size_t j = 0; j < corpus.size(); ++j) {
    const auto& vec = embedded[j];
    if (vec.dim() != dim) {
      throw Error(ErrorKind::kBuild, "statute '" + corpus.at(j).id + "' embedded with dim " +
                                         std::to_string(vec.dim()) + ", expected " + std::to_string(dim));
    }
    const double norm = vec.norm();
    if (norm == 0.0) {
      throw Error(ErrorKind::kBuild, "statute '" + corpus.at(j).id + "' has a zero-norm embedding and cannot be scored");
    }
    values.insert(values.end(), vec.values().begin(), vec.values().end());
    norms.push_back(norm);
  }
  return LawMatrix(dim, std::move(values), std::move(norms), corpus.fingerprint());
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorKind::kInvalidInput, "cosine_similarity: dim mismatch " + std::to_string(a.size()) + " vs " +
                                              std::to_string(b.size()));
  }
  const double na = l2_norm(a);
  const double nb = l2_norm(b);
  if (na == 0.0 || nb == 0.0) throw Error(ErrorKind::kInvalidInput, "cosine_similarity: zero-norm operand");
  return kernels::clamped_cosine(kernels::dot(a.data(), b.data(), a.size()), na, nb);
}

std::vector<double> fuse(std::span<const double> keyword, std::span<const double> query, double alpha) {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw Error(ErrorKind::kInvalidInput, "fuse: alpha must be finite and >= 0");
  const double nk = l2_norm(keyword);
  if (nk == 0.0) throw Error(ErrorKind::kInvalidInput, "fuse: keyword vector has zero norm");
  std::vector<double> v(keyword.size());
  for (std::size_t d = 0; d < keyword.size(); ++d) v[d] = keyword[d] / nk;
  if (alpha == 0.0) return v;
  if (query.size() != keyword.size()) throw Error(ErrorKind::kInvalidInput, "fuse: keyword/query dim mismatch");
  const double ns = l2_norm(query);
  if (ns == 0.0) throw Error(ErrorKind::kInvalidInput, "fuse: query vector has zero norm and alpha > 0");
  for (std::size_t d = 0; d < v.size(); ++d) v[d] += alpha * (query[d] / ns);
  return v;
}

std::string_view to_string(RetrievalMode mode) {
  return mode == RetrievalMode::kQueryOnly ? "query_only" : "fusion";
}

RetrievalMode retrieval_mode_from_string(std::string_view name) {
  if (name == "fusion") return RetrievalMode::kFusion;
  if (name == "query_only" || name == "query-only") return RetrievalMode::kQueryOnly;
  throw Error(ErrorKind::kConfig, "unknown retrieval mode '" + std::string(name) + "'");
}

void RetrievalConfig::validate() const {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw Error(ErrorKind::kInvalidInput, "alpha must be finite and >= 0");
  if (top_k < 1) throw Error(ErrorKind::kInvalidInput, "top_k must be >= 1");
  if (threads < 1) throw Error(ErrorKind::kInvalidInput, "threads must be >= 1");
}

namespace {

// Fused (or query) vectors laid out for the kernels.
struct FusedBlock {
  std::size_t dim = 0;
  std::vector<double> values;
  std::vector<double> norms;

  void push(std::span<const double> v, double norm) {
    values.insert(values.end(), v.begin(), v.end());
    norms.push_back(norm);
  }
  kernels::MatrixView view() const { return {values, norms, norms.size(), dim}; }
};

std::string keyword_name(const KeywordEmbeddings& keywords, std::size_t i) {
  return i < keywords.source_keywords.size() ? keywords.source_keywords[i] : "#" + std::to_string(i);
}

void warn(ScoreVector& out, std::string message) {
  spdlog::warn("{}", message);
  out.warnings.push_back(std::move(message));
}

ScoreVector score_with(const KeywordEmbeddings& keywords, const EmbeddingVector& query, const LawMatrix& laws,
                       const RetrievalConfig& cfg, int threads) {
  cfg.validate();
  if (threads < 1) throw Error(ErrorKind::kInvalidInput, "threads must be >= 1");
  const std::size_t dim = laws.dim();
  if (query.dim() != dim) {
    throw Error(ErrorKind::kInvalidInput, "query dim " + std::to_string(query.dim()) + " != index dim " +
                                              std::to_string(dim));
  }
  for (std::size_t i = 0; i < keywords.size(); ++i) {
    if (keywords.vectors[i].dim() != dim) {
      throw Error(ErrorKind::kInvalidInput, "keyword '" + keyword_name(keywords, i) + "' dim " +
                                                std::to_string(keywords.vectors[i].dim()) + " != index dim " +
                                                std::to_string(dim));
    }
  }

  ScoreVector out;
  out.effective_mode = cfg.mode;
  const double query_norm = query.norm();
  FusedBlock block;
  block.dim = dim;

  if (cfg.mode == RetrievalMode::kFusion) {
    if (keywords.size() == 0) throw Error(ErrorKind::kInvalidInput, "fusion mode requires at least one keyword");
    if (cfg.alpha > 0.0 && query_norm == 0.0) {
      throw Error(ErrorKind::kInvalidInput, "query embedding has zero norm and alpha > 0");
    }
    for (std::size_t i = 0; i < keywords.size(); ++i) {
      const auto& kw = keywords.vectors[i];
      const std::string name = keyword_name(keywords, i);
      if (kw.norm() == 0.0) {
        if (cfg.zero_keyword == ZeroKeywordPolicy::kError) {
          throw Error(ErrorKind::kInvalidInput, "keyword '" + name + "' has a zero-norm embedding");
        }
        warn(out, "skipping keyword '" + name + "': zero-norm embedding");
        continue;
      }
      auto fused = fuse(kw.values(), query.values(), cfg.alpha);
      const double fused_norm = l2_norm(fused);
      if (fused_norm == 0.0) {
        warn(out, "skipping keyword '" + name + "': fused vector cancels to zero");
        continue;
      }
      block.push(fused, fused_norm);
    }
    if (block.norms.empty()) {
      warn(out, "no usable keyword embedding; falling back to query-only scoring");
      out.effective_mode = RetrievalMode::kQueryOnly;
    }
  }

  if (out.effective_mode == RetrievalMode::kQueryOnly) {
    if (query_norm == 0.0) throw Error(ErrorKind::kInvalidInput, "query embedding has zero norm");
    block.push(query.values(), query_norm);
  }

  out.keywords_scored = out.effective_mode == RetrievalMode::kFusion ? block.norms.size() : 0;
  out.scores.assign(laws.rows(), 0.0);
  if (threads == 1) {
    kernels::score_serial(block.view(), laws.view(), out.scores);
  } else {
    kernels::score_parallel(block.view(), laws.view(), out.scores, threads);
  }
  if (cfg.mean_scores && out.keywords_scored > 1) {
    const double n = static_cast<double>(out.keywords_scored);
    for (double& s : out.scores) s /= n;
  }
  return out;
}

}  // namespace

ScoreVector score_corpus(const KeywordEmbeddings& keywords, const EmbeddingVector& query, const LawMatrix& laws,
                         const RetrievalConfig& cfg) {
  return score_with(keywords, query, laws, cfg, cfg.threads);
}

ScoreVector scan_parallel(const KeywordEmbeddings& keywords, const EmbeddingVector& query, const LawMatrix& laws,
                          const RetrievalConfig& cfg, int threads) {
  if (threads < 1) throw Error(ErrorKind::kInvalidInput, "threads must be >= 1");
  return score_with(keywords, query, laws, cfg, threads);
}

std::vector<ScoredHit> top_k(std::span<const double> scores, std::size_t k, const StatuteCorpus& corpus) {
  if (k < 1) throw Error(ErrorKind::kInvalidInput, "top_k: k must be >= 1");
  if (scores.size() != corpus.size()) {
    throw Error(ErrorKind::kInvalidInput, "top_k: " + std::to_string(scores.size()) + " scores for " +
                                              std::to_string(corpus.size()) + " statutes");
  }
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  const std::size_t n = std::min(k, order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n), order.end(),
                    [&](std::size_t a, std::size_t b) { return scores[a] > scores[b] || (scores[a] == scores[b] && a < b); });
  std::vector<ScoredHit> hits;
  hits.reserve(n);
  for (std::size_t r = 0; r < n; ++r) {
    hits.push_back({corpus.at(order[r]).id, order[r], scores[order[r]], r + 1});
  }
  return hits;
}

Retriever::Retriever(const StatuteCorpus& corpus, const LawMatrix& laws, Embedder& embedder,
                     KeywordExtractor& extractor, RetrievalConfig config)
    : corpus_(corpus), laws_(laws), embedder_(embedder), extractor_(extractor), config_(config) {
  config_.validate();
  if (laws_.corpus_fingerprint() != corpus_.fingerprint() || laws_.rows() != corpus_.size()) {
    throw Error(ErrorKind::kStaleIndex, "index was built from a different corpus");
  }
  if (embedder_.dim() != laws_.dim()) {
    throw Error(ErrorKind::kConfig, "embedder dim " + std::to_string(embedder_.dim()) + " != index dim " +
                                        std::to_string(laws_.dim()));
  }
}

RetrievalResult Retriever::retrieve(std::string_view query) const { return retrieve(query, config_); }

RetrievalResult Retriever::retrieve(std::string_view query, const RetrievalConfig& config) const {
  RetrievalResult result;
  KeywordEmbeddings keyword_vectors;
  try {
    if (text::is_blank(query)) throw Error(ErrorKind::kInvalidInput, "query is empty");
    if (config.mode == RetrievalMode::kFusion) result.keywords = extractor_.extract(query);
  } catch (const Error& e) {
    throw e.in_stage("extract");
  }
  try {
    keyword_vectors = embed_keywords(result.keywords, embedder_);
  } catch (const Error& e) {
    throw e.in_stage("embed-keywords");
  }
  std::optional<EmbeddingVector> query_vector;
  try {
    query_vector = embedder_.embed_text(query);
  } catch (const Error& e) {
    throw e.in_stage("embed-query");
  }
  ScoreVector scores;
  try {
    scores = score_corpus(keyword_vectors, *query_vector, laws_, config);
  } catch (const Error& e) {
    throw e.in_stage("score");
  }
  result.hits = top_k(scores.scores, config.top_k, corpus_);
  result.effective_mode = scores.effective_mode;
  result.warnings = std::move(scores.warnings);
  return result;
}

}  // namespace lexfuse
