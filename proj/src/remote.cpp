// HTTP clients for the remote embedder, keyword extractor and LLM backend.
// All three speak one-shot JSON over plain HTTP POST.

#include <cmath>

#include "httplib.h"
#include "json.hpp"
#include "lexfuse/embedding.hpp"
#include "lexfuse/error.hpp"
#include "lexfuse/hash.hpp"
#include "lexfuse/keywords.hpp"
#include "lexfuse/pipeline.hpp"
#include "lexfuse/text.hpp"

namespace lexfuse {
namespace {

using nlohmann::json;

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

Endpoint parse_endpoint(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos || url.compare(0, scheme_end, "http") != 0) {
    throw Error(ErrorKind::kConfig, "endpoint '" + url + "' must be an http:// URL");
  }
  const auto path_start = url.find('/', scheme_end + 3);
  Endpoint ep;
  ep.origin = url.substr(0, path_start);
  ep.path = path_start == std::string::npos ? "/" : url.substr(path_start);
  if (ep.origin.size() <= scheme_end + 3) throw Error(ErrorKind::kConfig, "endpoint '" + url + "' has no host");
  return ep;
}

json post_json(const std::string& url, const json& body, double timeout_seconds) {
  const Endpoint ep = parse_endpoint(url);
  httplib::Client client(ep.origin);
  const auto secs = static_cast<time_t>(timeout_seconds);
  const auto usecs = static_cast<time_t>((timeout_seconds - static_cast<double>(secs)) * 1e6);
  client.set_connection_timeout(secs, usecs);
  client.set_read_timeout(secs, usecs);
  client.set_write_timeout(secs, usecs);

  auto res = client.Post(ep.path, body.dump(), "application/json");
  if (!res) {
    throw Error(ErrorKind::kRetryable, "POST " + url + " failed: " + httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    throw Error(ErrorKind::kProtocol, "POST " + url + " returned HTTP " + std::to_string(res->status));
  }
  try {
    return json::parse(res->body);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kProtocol, "POST " + url + " returned invalid JSON: " + e.what());
  }
}

}  // namespace

// --- embedder --------------------------------------------------------------------

RemoteEmbedder::RemoteEmbedder(std::string endpoint, std::size_t dim, double timeout_seconds)
    : endpoint_(std::move(endpoint)), dim_(dim), timeout_seconds_(timeout_seconds) {
  if (dim_ == 0) throw Error(ErrorKind::kConfig, "embedder dim must be >= 1");
  parse_endpoint(endpoint_);
}

std::uint64_t RemoteEmbedder::fingerprint() const {
  EmbedderConfig config;
  config.kind = EmbedderKind::kRemote;
  config.dim = dim_;
  config.endpoint = endpoint_;
  return config.fingerprint();
}

EmbeddingVector RemoteEmbedder::embed_text(std::string_view input) {
  const std::string one(input);
  return std::move(embed_batch(std::span<const std::string>(&one, 1)).front());
}

std::vector<EmbeddingVector> RemoteEmbedder::embed_batch(std::span<const std::string> texts) {
  for (std::size_t i = 0; i < texts.size(); ++i) {
    if (text::is_blank(texts[i])) {
      throw Error(ErrorKind::kInvalidInput, texts.size() == 1 ? std::string("cannot embed empty text")
                                                             : "embed_batch: text at index " + std::to_string(i) + " is empty");
    }
  }
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  for (std::size_t begin = 0; begin < texts.size(); begin += kMaxBatch) {
    const auto chunk = texts.subspan(begin, std::min(kMaxBatch, texts.size() - begin));
    const json reply = post_json(endpoint_, {{"texts", std::vector<std::string>(chunk.begin(), chunk.end())}},
                                 timeout_seconds_);
    if (!reply.is_object() || !reply.contains("vectors") || !reply["vectors"].is_array()) {
      throw Error(ErrorKind::kProtocol, "embedding reply lacks a 'vectors' array");
    }
    if (reply.contains("dim") && (!reply["dim"].is_number_unsigned() || reply["dim"].get<std::size_t>() != dim_)) {
      throw Error(ErrorKind::kProtocol, "embedding service dim " + reply["dim"].dump() + " != configured dim " +
                                            std::to_string(dim_));
    }
    const auto& vectors = reply["vectors"];
    if (vectors.size() != chunk.size()) {
      throw Error(ErrorKind::kProtocol, "embedding service returned " + std::to_string(vectors.size()) +
                                            " vectors for " + std::to_string(chunk.size()) + " texts");
    }
    for (const auto& v : vectors) {
      if (!v.is_array() || v.size() != dim_) {
        throw Error(ErrorKind::kProtocol, "embedding service returned a vector of the wrong dim");
      }
      std::vector<double> values;
      values.reserve(dim_);
      for (const auto& x : v) {
        if (!x.is_number() || !std::isfinite(x.get<double>())) {
          throw Error(ErrorKind::kProtocol, "embedding service returned a non-finite or non-numeric value");
        }
        values.push_back(x.get<double>());
      }
      out.emplace_back(std::move(values));
    }
  }
  return out;
}

// --- keyword extractor ---------------------------------------------------------

RemoteExtractor::RemoteExtractor(ExtractorConfig config) : config_(std::move(config)) {
  config_.validate();
  parse_endpoint(config_.endpoint);
}

KeywordSet RemoteExtractor::extract(std::string_view query) {
  if (text::is_blank(query)) throw Error(ErrorKind::kInvalidInput, "query is empty");
  const json reply = post_json(config_.endpoint, {{"query", std::string(query)}, {"max_keywords", config_.max_keywords}},
                               config_.timeout_seconds);
  if (!reply.is_object() || !reply.contains("keywords") || !reply["keywords"].is_array()) {
    throw Error(ErrorKind::kProtocol, "extractor reply lacks a 'keywords' array");
  }
  KeywordSet out;
  std::unordered_set<std::string> seen;
  for (const auto& kw : reply["keywords"]) {
    if (!kw.is_string()) throw Error(ErrorKind::kProtocol, "extractor returned a non-string keyword");
    auto word = kw.get<std::string>();
    if (text::is_blank(word)) continue;
    if (!config_.allow_duplicates && !seen.insert(word).second) continue;
    if (out.keywords.size() == config_.max_keywords) break;
    out.keywords.push_back(std::move(word));
  }
  if (out.keywords.empty()) {
    out.keywords.push_back(text::collapse_whitespace(query));
    out.fell_back_to_query = true;
  }
  return out;
}

// --- LLM backend -----------------------------------------------------------------

namespace pipeline {

RemoteBackend::RemoteBackend(std::string endpoint, double timeout_seconds)
    : endpoint_(std::move(endpoint)), timeout_seconds_(timeout_seconds) {
  parse_endpoint(endpoint_);
}

std::string RemoteBackend::complete(std::string_view prompt) {
  if (prompt.empty()) throw Error(ErrorKind::kInvalidInput, "empty prompt");
  const json reply = post_json(endpoint_, {{"prompt", std::string(prompt)}}, timeout_seconds_);
  if (!reply.is_object() || !reply.contains("text") || !reply["text"].is_string()) {
    throw Error(ErrorKind::kProtocol, "LLM reply lacks a string 'text'");
  }
  return reply["text"].get<std::string>();
}

}  // namespace pipeline
}  // namespace lexfuse
