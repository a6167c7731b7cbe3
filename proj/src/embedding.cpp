#include "lexfuse/embedding.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <optional>

#include "json.hpp"
#include "lexfuse/error.hpp"
#include "lexfuse/hash.hpp"
#include "lexfuse/text.hpp"

namespace lexfuse {

EmbeddingVector::EmbeddingVector(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) throw Error(ErrorKind::kInvalidInput, "embedding must have dim >= 1");
  for (double v : values_) {
    if (!std::isfinite(v)) throw Error(ErrorKind::kInvalidInput, "embedding contains a non-finite value");
  }
}

double EmbeddingVector::norm() const {
  double sum = 0.0;
  for (double v : values_) sum += v * v;
  return std::sqrt(sum);
}

std::string_view to_string(EmbedderKind kind) {
  switch (kind) {
    case EmbedderKind::kReference: return "reference";
    case EmbedderKind::kFile: return "file";
    case EmbedderKind::kRemote: return "remote";
  }
  return "reference";
}

EmbedderKind embedder_kind_from_string(std::string_view name) {
  if (name == "reference") return EmbedderKind::kReference;
  if (name == "file") return EmbedderKind::kFile;
  if (name == "remote") return EmbedderKind::kRemote;
  throw Error(ErrorKind::kConfig, "unknown embedder kind '" + std::string(name) + "'");
}

void EmbedderConfig::validate() const {
  if (dim == 0) throw Error(ErrorKind::kConfig, "embedder dim must be >= 1");
  if (kind == EmbedderKind::kRemote && endpoint.empty()) {
    throw Error(ErrorKind::kConfig, "remote embedder requires an endpoint");
  }
  if (kind == EmbedderKind::kFile && sidecar_path.empty()) {
    throw Error(ErrorKind::kConfig, "file embedder requires a sidecar path");
  }
  if (!(timeout_seconds > 0.0)) throw Error(ErrorKind::kConfig, "embedder timeout must be positive");
}

std::uint64_t EmbedderConfig::fingerprint() const {
  Fingerprint fp;
  fp.add(to_string(kind)).add(static_cast<std::uint64_t>(dim));
  switch (kind) {
    case EmbedderKind::kReference: fp.add(seed); break;
    case EmbedderKind::kFile: fp.add(sidecar_path); break;
    case EmbedderKind::kRemote: fp.add(endpoint); break;
  }
  return fp.value();
}

std::vector<EmbeddingVector> Embedder::embed_batch(std::span<const std::string> texts) {
  for (std::size_t i = 0; i < texts.size(); ++i) {
    if (text::is_blank(texts[i])) {
      throw Error(ErrorKind::kInvalidInput, "embed_batch: text at index " + std::to_string(i) + " is empty");
    }
  }
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(embed_text(t));
  return out;
}

std::vector<EmbeddingVector> Embedder::embed_records(std::span<const StatuteRecord> records) {
  std::vector<std::string> texts;
  texts.reserve(records.size());
  for (const auto& rec : records) texts.push_back(rec.text);
  return embed_batch(texts);
}

// --- reference ---------------------------------------------------------------

ReferenceEmbedder::ReferenceEmbedder(std::size_t dim, std::uint64_t seed) : dim_(dim), seed_(seed) {
  if (dim_ == 0) throw Error(ErrorKind::kConfig, "embedder dim must be >= 1");
}

std::uint64_t ReferenceEmbedder::fingerprint() const {
  EmbedderConfig config;
  config.kind = EmbedderKind::kReference;
  config.dim = dim_;
  config.seed = seed_;
  return config.fingerprint();
}

ReferenceEmbedder::Slot ReferenceEmbedder::slot_for(std::string_view token) const {
  const std::uint64_t h = seeded_hash64(token, seed_);
  return {static_cast<std::size_t>(h % dim_), (h >> 63) ? -1.0 : 1.0};
}

EmbeddingVector ReferenceEmbedder::embed_text(std::string_view input) {
  if (text::is_blank(input)) throw Error(ErrorKind::kInvalidInput, "cannot embed empty text");
  std::vector<double> values(dim_, 0.0);
  for (const auto& token : text::tokenize(input)) {
    const Slot slot = slot_for(token);
    values[slot.bucket] += slot.sign;
  }
  return EmbeddingVector(std::move(values));
}

// --- file --------------------------------------------------------------------

FileEmbedder::FileEmbedder(const std::string& path, std::size_t dim) : dim_(dim) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open embedding sidecar '" + path + "'");
  Fingerprint fp;
  fp.add("file").add(static_cast<std::uint64_t>(dim));
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::is_blank(line)) continue;
    const std::string where = path + ":" + std::to_string(line_no);
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::kParse, where + ": " + e.what());
    }
    if (!obj.is_object() || !obj.contains("key") || !obj["key"].is_string() || !obj.contains("vector") ||
        !obj["vector"].is_array()) {
      throw Error(ErrorKind::kParse, where + ": expected {\"key\": string, \"vector\": [number...]}");
    }
    std::vector<double> values;
    for (const auto& v : obj["vector"]) {
      if (!v.is_number()) throw Error(ErrorKind::kParse, where + ": vector entries must be numbers");
      values.push_back(v.get<double>());
    }
    if (values.size() != dim_) {
      throw Error(ErrorKind::kInvalidInput, where + ": vector has dim " + std::to_string(values.size()) +
                                                ", expected " + std::to_string(dim_));
    }
    auto key = obj["key"].get<std::string>();
    fp.add(key);
    for (double v : values) fp.add(std::bit_cast<std::uint64_t>(v));
    vectors_.insert_or_assign(std::move(key), EmbeddingVector(std::move(values)));
  }
  fingerprint_ = fp.value();
}

EmbeddingVector FileEmbedder::embed_text(std::string_view input) {
  if (text::is_blank(input)) throw Error(ErrorKind::kInvalidInput, "cannot embed empty text");
  auto it = vectors_.find(std::string(input));
  if (it == vectors_.end()) throw Error(ErrorKind::kNotFound, "no precomputed embedding for text '" + std::string(text::utf8_prefix(input, 40)) + "'");
  return it->second;
}

std::vector<EmbeddingVector> FileEmbedder::embed_records(std::span<const StatuteRecord> records) {
  std::vector<EmbeddingVector> out;
  out.reserve(records.size());
  for (const auto& rec : records) {
    if (auto it = vectors_.find(rec.id); it != vectors_.end()) {
      out.push_back(it->second);
    } else {
      out.push_back(embed_text(rec.text));
    }
  }
  return out;
}

// --- cache -------------------------------------------------------------------

CachingEmbedder::CachingEmbedder(std::unique_ptr<Embedder> inner, std::size_t capacity)
    : inner_(std::move(inner)), cache_(capacity) {}

std::string CachingEmbedder::key(std::string_view text) const {
  std::string k = hex64(inner_->fingerprint());
  k += '\0';
  k.append(text);
  return k;
}

EmbeddingVector CachingEmbedder::embed_text(std::string_view text) {
  const std::string k = key(text);
  if (auto hit = cache_.get(k)) {
    ++hits_;
    return *hit;
  }
  ++misses_;
  EmbeddingVector v = inner_->embed_text(text);
  cache_.put(k, v);
  return v;
}

std::vector<EmbeddingVector> CachingEmbedder::embed_batch(std::span<const std::string> texts) {
  for (std::size_t i = 0; i < texts.size(); ++i) {
    if (text::is_blank(texts[i])) {
      throw Error(ErrorKind::kInvalidInput, "embed_batch: text at index " + std::to_string(i) + " is empty");
    }
  }
  std::vector<std::optional<EmbeddingVector>> slots(texts.size());
  std::vector<std::string> missing;
  std::vector<std::size_t> missing_at;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    if (auto hit = cache_.get(key(texts[i]))) {
      ++hits_;
      slots[i] = std::move(*hit);
    } else {
      ++misses_;
      missing.push_back(texts[i]);
      missing_at.push_back(i);
    }
  }
  if (!missing.empty()) {
    auto fresh = inner_->embed_batch(missing);
    for (std::size_t m = 0; m < missing.size(); ++m) {
      cache_.put(key(missing[m]), fresh[m]);
      slots[missing_at[m]] = std::move(fresh[m]);
    }
  }
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

std::unique_ptr<Embedder> make_embedder(const EmbedderConfig& config) {
  config.validate();
  std::unique_ptr<Embedder> base;
  switch (config.kind) {
    case EmbedderKind::kReference:
      base = std::make_unique<ReferenceEmbedder>(config.dim, config.seed);
      break;
    case EmbedderKind::kFile:
      base = std::make_unique<FileEmbedder>(config.sidecar_path, config.dim);
      break;
    case EmbedderKind::kRemote:
      base = std::make_unique<RemoteEmbedder>(config.endpoint, config.dim, config.timeout_seconds);
      break;
  }
  if (config.cache_capacity == 0) return base;
  return std::make_unique<CachingEmbedder>(std::move(base), config.cache_capacity);
}

}  // namespace lexfuse
