#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>

#include "json.hpp"
#include "lexfuse/embedding.hpp"
#include "lexfuse/fusion.hpp"
#include "lexfuse/keywords.hpp"

namespace lexfuse {

enum class BackendKind { kMock, kRemote };
BackendKind backend_kind_from_string(std::string_view name);
std::string_view to_string(BackendKind kind);

// Everything the CLI can be told, from built-in defaults, a JSON config
// file, environment variables, and flags (in increasing precedence).
struct AppConfig {
  EmbedderConfig embedder;
  ExtractorConfig extractor;
  std::string stopwords_path;  // empty: built-in English list
  std::string idf_path;        // empty: no idf table
  RetrievalConfig retrieval;

  double k_factor = 32.0;
  std::uint64_t arena_seed = 0;

  BackendKind backend = BackendKind::kMock;
  std::string llm_endpoint;
  double llm_timeout_seconds = 60.0;
  std::string templates_dir;  // empty: built-in templates
  std::size_t self_suggestion_rounds = 1;

  // kConfig on invalid values or combinations (remote pieces without an
  // endpoint, zero dim, negative alpha, ...).
  void validate() const;
};

// Only knobs a flag can set; unset members leave the config untouched.
struct ConfigOverrides {
  std::optional<std::string> embedder_kind;
  std::optional<std::size_t> dim;
  std::optional<std::uint64_t> seed;  // embedder and arena
  std::optional<std::string> embedder_endpoint;
  std::optional<std::string> sidecar_path;
  std::optional<std::size_t> cache_capacity;

  std::optional<std::string> extractor_kind;
  std::optional<std::size_t> max_keywords;
  std::optional<std::string> stopwords_path;
  std::optional<std::string> idf_path;
  std::optional<bool> allow_duplicate_keywords;
  std::optional<std::string> extractor_endpoint;

  std::optional<double> alpha;
  std::optional<std::size_t> top_k;
  std::optional<std::string> mode;
  std::optional<bool> mean_scores;
  std::optional<int> threads;

  std::optional<double> k_factor;

  std::optional<std::string> backend;
  std::optional<std::string> llm_endpoint;
  std::optional<std::string> templates_dir;
  std::optional<std::size_t> self_suggestion_rounds;
};

// Applies a parsed config document. Unknown sections or keys, and values
// of the wrong type, are kConfig errors.
void apply_config_json(AppConfig& config, const nlohmann::json& doc);

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;

// LEXFUSE_EMBEDDER_ENDPOINT, LEXFUSE_EXTRACTOR_ENDPOINT, LEXFUSE_LLM_ENDPOINT.
void apply_env(AppConfig& config, const EnvLookup& env);

void apply_overrides(AppConfig& config, const ConfigOverrides& overrides);

EnvLookup process_env();

// defaults -> config file (if any) -> env -> flags, then validate.
AppConfig resolve_config(const std::optional<std::string>& config_path, const EnvLookup& env,
                         const ConfigOverrides& overrides);

// Loads stopwords and idf table named by the config into an ExtractorConfig.
ExtractorConfig materialize_extractor(const AppConfig& config);

}  // namespace lexfuse
