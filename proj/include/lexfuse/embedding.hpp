#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lexfuse/lru_cache.hpp"
#include "lexfuse/statute_store.hpp"

namespace lexfuse {

// Dense embedding of a text. Always dim >= 1 with finite entries; the
// constructor enforces both. Vectors are stored unnormalized.
class EmbeddingVector {
 public:
  explicit EmbeddingVector(std::vector<double> values);

  std::size_t dim() const { return values_.size(); }
  std::span<const double> values() const { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  double norm() const;

  friend bool operator==(const EmbeddingVector&, const EmbeddingVector&) = default;

 private:
  std::vector<double> values_;
};

enum class EmbedderKind { kReference, kFile, kRemote };

std::string_view to_string(EmbedderKind kind);
EmbedderKind embedder_kind_from_string(std::string_view name);

struct EmbedderConfig {
  EmbedderKind kind = EmbedderKind::kReference;
  std::size_t dim = 256;
  std::uint64_t seed = 0;
  std::string endpoint;      // remote only
  std::string sidecar_path;  // file only
  std::size_t cache_capacity = 4096;
  double timeout_seconds = 30.0;

  // Throws Error(kConfig) for invalid combinations.
  void validate() const;
  // Identifies the embedding function (not the cache size or timeout).
  std::uint64_t fingerprint() const;
};

// Text embedding contract. Implementations are safe for concurrent calls.
class Embedder {
 public:
  virtual ~Embedder() = default;

  virtual std::size_t dim() const = 0;
  virtual std::uint64_t fingerprint() const = 0;

  // Throws Error(kInvalidInput) for blank text.
  virtual EmbeddingVector embed_text(std::string_view text) = 0;

  // Element i equals embed_text(texts[i]). Blank elements are rejected up
  // front with an error naming their index.
  virtual std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts);

  // Embeds statutes for indexing, one vector per record in order. Defaults
  // to embed_batch over the statute texts.
  virtual std::vector<EmbeddingVector> embed_records(std::span<const StatuteRecord> records);
};

// Signed hashed bag-of-words. Each token t adds sign(t) to coordinate
// h(t) mod dim, where h is the seeded 64-bit token hash and bit 63 of h picks
// the sign (0 -> +1, 1 -> -1). Text without tokens embeds to the zero vector.
class ReferenceEmbedder final : public Embedder {
 public:
  ReferenceEmbedder(std::size_t dim, std::uint64_t seed);

  std::size_t dim() const override { return dim_; }
  std::uint64_t fingerprint() const override;
  EmbeddingVector embed_text(std::string_view text) override;

  struct Slot {
    std::size_t bucket;
    double sign;
  };
  Slot slot_for(std::string_view token) const;

 private:
  std::size_t dim_;
  std::uint64_t seed_;
};

// Precomputed vectors from a sidecar file of {"key": string, "vector": [...]}
// lines. Statutes are looked up by id first, then by text; free text by text.
class FileEmbedder final : public Embedder {
 public:
  FileEmbedder(const std::string& path, std::size_t dim);

  std::size_t dim() const override { return dim_; }
  std::uint64_t fingerprint() const override { return fingerprint_; }
  EmbeddingVector embed_text(std::string_view text) override;
  std::vector<EmbeddingVector> embed_records(std::span<const StatuteRecord> records) override;

  std::size_t size() const { return vectors_.size(); }

 private:
  std::size_t dim_;
  std::uint64_t fingerprint_;
  std::unordered_map<std::string, EmbeddingVector> vectors_;
};

// JSON-over-HTTP batch client:
//   POST {"texts": [...]} -> {"vectors": [[...], ...], "dim": d}
// Transport failures are kRetryable; non-200 replies, shape or dim
// mismatches are kProtocol. Large batches are split into sequential requests
// of at most kMaxBatch texts; never more than one request in flight.
class RemoteEmbedder final : public Embedder {
 public:
  RemoteEmbedder(std::string endpoint, std::size_t dim, double timeout_seconds);

  std::size_t dim() const override { return dim_; }
  std::uint64_t fingerprint() const override;
  EmbeddingVector embed_text(std::string_view text) override;
  std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts) override;

  static constexpr std::size_t kMaxBatch = 256;

 private:
  std::string endpoint_;
  std::size_t dim_;
  double timeout_seconds_;
};

// LRU decorator keyed by (inner fingerprint, exact text bytes). Results are
// bitwise identical to the uncached embedder.
class CachingEmbedder final : public Embedder {
 public:
  CachingEmbedder(std::unique_ptr<Embedder> inner, std::size_t capacity);

  std::size_t dim() const override { return inner_->dim(); }
  std::uint64_t fingerprint() const override { return inner_->fingerprint(); }
  EmbeddingVector embed_text(std::string_view text) override;
  std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts) override;
  // Statute embeddings are computed once per build and bypass the cache.
  std::vector<EmbeddingVector> embed_records(std::span<const StatuteRecord> records) override {
    return inner_->embed_records(records);
  }

  std::size_t hits() const { return hits_; }
  std::size_t misses() const { return misses_; }

 private:
  std::string key(std::string_view text) const;

  std::unique_ptr<Embedder> inner_;
  LruCache<std::string, EmbeddingVector> cache_;
  std::atomic<std::size_t> hits_{0};
  std::atomic<std::size_t> misses_{0};
};

// Builds the configured embedder, wrapped in a cache when capacity > 0.
std::unique_ptr<Embedder> make_embedder(const EmbedderConfig& config);

}  // namespace lexfuse
