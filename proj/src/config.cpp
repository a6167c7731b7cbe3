#include "lexfuse/config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>

#include "lexfuse/error.hpp"

namespace lexfuse {
namespace {

using nlohmann::json;

Error config_error(const std::string& message) { return Error(ErrorKind::kConfig, message); }

void check_keys(const json& section, const std::string& name, const std::set<std::string>& allowed) {
  if (!section.is_object()) throw config_error("config section '" + name + "' must be an object");
  for (const auto& [key, _] : section.items()) {
    if (!allowed.contains(key)) throw config_error("unknown config key '" + name + "." + key + "'");
  }
}

template <typename T>
void read(const json& section, const std::string& section_name, const char* key, T& target) {
  auto it = section.find(key);
  if (it == section.end()) return;
  try {
    if constexpr (std::is_same_v<T, std::string>) {
      if (!it->is_string()) throw config_error("");
    } else if constexpr (std::is_same_v<T, bool>) {
      if (!it->is_boolean()) throw config_error("");
    } else if constexpr (std::is_unsigned_v<T>) {
      if (!it->is_number_unsigned()) throw config_error("");
    } else if constexpr (std::is_integral_v<T>) {
      if (!it->is_number_integer()) throw config_error("");
    } else {
      if (!it->is_number()) throw config_error("");
    }
    target = it->get<T>();
  } catch (const std::exception&) {
    throw config_error("config key '" + section_name + "." + key + "' has the wrong type");
  }
}

}  // namespace

BackendKind backend_kind_from_string(std::string_view name) {
  if (name == "mock") return BackendKind::kMock;
  if (name == "remote") return BackendKind::kRemote;
  throw config_error("unknown backend '" + std::string(name) + "'");
}

std::string_view to_string(BackendKind kind) { return kind == BackendKind::kRemote ? "remote" : "mock"; }

void AppConfig::validate() const {
  embedder.validate();
  extractor.validate();
  try {
    retrieval.validate();
  } catch (const Error& e) {
    throw config_error(e.what());
  }
  if (!(k_factor > 0.0) || !std::isfinite(k_factor)) throw config_error("arena K-factor must be positive");
  if (backend == BackendKind::kRemote && llm_endpoint.empty()) throw config_error("remote backend requires an endpoint");
  if (!(llm_timeout_seconds > 0.0)) throw config_error("LLM timeout must be positive");
}

void apply_config_json(AppConfig& c, const json& doc) {
  check_keys(doc, "<root>", {"seed", "embedder", "extractor", "retrieval", "arena", "pipeline"});
  if (doc.contains("seed")) {
    read(doc, "<root>", "seed", c.embedder.seed);
    c.arena_seed = c.embedder.seed;
  }
  if (auto it = doc.find("embedder"); it != doc.end()) {
    const json& s = *it;
    check_keys(s, "embedder", {"kind", "dim", "seed", "endpoint", "sidecar", "cache_capacity", "timeout_seconds"});
    std::string kind(to_string(c.embedder.kind));
    read(s, "embedder", "kind", kind);
    c.embedder.kind = embedder_kind_from_string(kind);
    read(s, "embedder", "dim", c.embedder.dim);
    read(s, "embedder", "seed", c.embedder.seed);
    read(s, "embedder", "endpoint", c.embedder.endpoint);
    read(s, "embedder", "sidecar", c.embedder.sidecar_path);
    read(s, "embedder", "cache_capacity", c.embedder.cache_capacity);
    read(s, "embedder", "timeout_seconds", c.embedder.timeout_seconds);
  }
  if (auto it = doc.find("extractor"); it != doc.end()) {
    const json& s = *it;
    check_keys(s, "extractor", {"kind", "max_keywords", "stopwords", "idf", "allow_duplicate_keywords", "endpoint",
                                "timeout_seconds"});
    std::string kind(to_string(c.extractor.kind));
    read(s, "extractor", "kind", kind);
    c.extractor.kind = extractor_kind_from_string(kind);
    read(s, "extractor", "max_keywords", c.extractor.max_keywords);
    read(s, "extractor", "stopwords", c.stopwords_path);
    read(s, "extractor", "idf", c.idf_path);
    read(s, "extractor", "allow_duplicate_keywords", c.extractor.allow_duplicates);
    read(s, "extractor", "endpoint", c.extractor.endpoint);
    read(s, "extractor", "timeout_seconds", c.extractor.timeout_seconds);
  }
  if (auto it = doc.find("retrieval"); it != doc.end()) {
    const json& s = *it;
    check_keys(s, "retrieval", {"alpha", "top_k", "mode", "mean_scores", "threads", "zero_keyword"});
    read(s, "retrieval", "alpha", c.retrieval.alpha);
    read(s, "retrieval", "top_k", c.retrieval.top_k);
    std::string mode(to_string(c.retrieval.mode));
    read(s, "retrieval", "mode", mode);
    c.retrieval.mode = retrieval_mode_from_string(mode);
    read(s, "retrieval", "mean_scores", c.retrieval.mean_scores);
    read(s, "retrieval", "threads", c.retrieval.threads);
    std::string zero = c.retrieval.zero_keyword == ZeroKeywordPolicy::kError ? "error" : "skip";
    read(s, "retrieval", "zero_keyword", zero);
    if (zero != "skip" && zero != "error") throw config_error("retrieval.zero_keyword must be 'skip' or 'error'");
    c.retrieval.zero_keyword = zero == "error" ? ZeroKeywordPolicy::kError : ZeroKeywordPolicy::kSkip;
  }
  if (auto it = doc.find("arena"); it != doc.end()) {
    check_keys(*it, "arena", {"k_factor", "seed"});
    read(*it, "arena", "k_factor", c.k_factor);
    read(*it, "arena", "seed", c.arena_seed);
  }
  if (auto it = doc.find("pipeline"); it != doc.end()) {
    const json& s = *it;
    check_keys(s, "pipeline", {"backend", "endpoint", "timeout_seconds", "templates", "self_suggestion_rounds"});
    std::string backend(to_string(c.backend));
    read(s, "pipeline", "backend", backend);
    c.backend = backend_kind_from_string(backend);
    read(s, "pipeline", "endpoint", c.llm_endpoint);
    read(s, "pipeline", "timeout_seconds", c.llm_timeout_seconds);
    read(s, "pipeline", "templates", c.templates_dir);
    read(s, "pipeline", "self_suggestion_rounds", c.self_suggestion_rounds);
  }
}

void apply_env(AppConfig& c, const EnvLookup& env) {
  if (auto v = env("LEXFUSE_EMBEDDER_ENDPOINT")) c.embedder.endpoint = *v;
  if (auto v = env("LEXFUSE_EXTRACTOR_ENDPOINT")) c.extractor.endpoint = *v;
  if (auto v = env("LEXFUSE_LLM_ENDPOINT")) c.llm_endpoint = *v;
}

void apply_overrides(AppConfig& c, const ConfigOverrides& o) {
  if (o.embedder_kind) c.embedder.kind = embedder_kind_from_string(*o.embedder_kind);
  if (o.dim) c.embedder.dim = *o.dim;
  if (o.seed) {
    c.embedder.seed = *o.seed;
    c.arena_seed = *o.seed;
  }
  if (o.embedder_endpoint) c.embedder.endpoint = *o.embedder_endpoint;
  if (o.sidecar_path) c.embedder.sidecar_path = *o.sidecar_path;
  if (o.cache_capacity) c.embedder.cache_capacity = *o.cache_capacity;

  if (o.extractor_kind) c.extractor.kind = extractor_kind_from_string(*o.extractor_kind);
  if (o.max_keywords) c.extractor.max_keywords = *o.max_keywords;
  if (o.stopwords_path) c.stopwords_path = *o.stopwords_path;
  if (o.idf_path) c.idf_path = *o.idf_path;
  if (o.allow_duplicate_keywords) c.extractor.allow_duplicates = *o.allow_duplicate_keywords;
  if (o.extractor_endpoint) c.extractor.endpoint = *o.extractor_endpoint;

  if (o.alpha) c.retrieval.alpha = *o.alpha;
  if (o.top_k) c.retrieval.top_k = *o.top_k;
  if (o.mode) c.retrieval.mode = retrieval_mode_from_string(*o.mode);
  if (o.mean_scores) c.retrieval.mean_scores = *o.mean_scores;
  if (o.threads) c.retrieval.threads = *o.threads;

  if (o.k_factor) c.k_factor = *o.k_factor;

  if (o.backend) c.backend = backend_kind_from_string(*o.backend);
  if (o.llm_endpoint) c.llm_endpoint = *o.llm_endpoint;
  if (o.templates_dir) c.templates_dir = *o.templates_dir;
  if (o.self_suggestion_rounds) c.self_suggestion_rounds = *o.self_suggestion_rounds;
}

EnvLookup process_env() {
  return [](const std::string& name) -> std::optional<std::string> {
    const char* v = std::getenv(name.c_str());
    if (v == nullptr || *v == '\0') return std::nullopt;
    return std::string(v);
  };
}

AppConfig resolve_config(const std::optional<std::string>& config_path, const EnvLookup& env,
                         const ConfigOverrides& overrides) {
  AppConfig config;
  if (config_path) {
    std::ifstream in(*config_path);
    if (!in) throw Error(ErrorKind::kIo, "cannot open config file '" + *config_path + "'");
    json doc;
    try {
      doc = json::parse(in);
    } catch (const json::exception& e) {
      throw config_error("config file '" + *config_path + "': " + e.what());
    }
    apply_config_json(config, doc);
  }
  apply_env(config, env);
  apply_overrides(config, overrides);
  config.validate();
  return config;
}

ExtractorConfig materialize_extractor(const AppConfig& config) {
  ExtractorConfig out = config.extractor;
  out.stopwords = config.stopwords_path.empty() ? default_stopwords() : load_stopwords_file(config.stopwords_path);
  if (!config.idf_path.empty()) out.idf_table = load_idf_table_file(config.idf_path);
  return out;
}

}  // namespace lexfuse
