#pragma once

#include <chrono>
#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lexfuse/fusion.hpp"
#include "lexfuse/keywords.hpp"

// Consult -> reference -> draft -> self-suggestion inference flow.
namespace lexfuse::pipeline {

inline constexpr std::string_view kStageConsult = "consult";
inline constexpr std::string_view kStageReference = "reference";
inline constexpr std::string_view kStageDraft = "draft";
inline constexpr std::string_view kStageSelfSuggestion = "self-suggestion";

// Replaces every {slot} with its binding; "{{" and "}}" are literal braces.
// A slot without a binding is a kConfig error naming the slot; unused
// bindings are fine.
std::string render_prompt(std::string_view tmpl, const std::map<std::string, std::string>& bindings);

// Slot names referenced by a template, in order of first use.
std::vector<std::string> template_slots(std::string_view tmpl);

struct Templates {
  std::string answer;    // slots: query, keywords, statutes
  std::string critique;  // slots: query, keywords, statutes, draft
  std::string no_statutes = "No relevant statute found.";

  // kConfig when a template uses a slot it will never be given.
  void validate() const;
};

Templates default_templates();
// Reads answer.txt and critique.txt (required) and no_statutes.txt
// (optional) from `dir`.
Templates load_templates(const std::string& dir);

class LlmBackend {
 public:
  virtual ~LlmBackend() = default;
  virtual std::string complete(std::string_view prompt) = 0;
};

// Deterministic stand-in: "mock:<16 hex digest>:<first N code points>".
class MockBackend final : public LlmBackend {
 public:
  explicit MockBackend(std::size_t prefix_code_points = 48) : prefix_(prefix_code_points) {}
  // Throws kInvalidInput on an empty prompt.
  std::string complete(std::string_view prompt) override;

 private:
  std::size_t prefix_;
};

// POST {"prompt": string} -> {"text": string}.
class RemoteBackend final : public LlmBackend {
 public:
  RemoteBackend(std::string endpoint, double timeout_seconds);
  std::string complete(std::string_view prompt) override;

 private:
  std::string endpoint_;
  double timeout_seconds_;
};

struct StageSwitches {
  bool consult = true;
  bool reference = true;
  bool self_suggestion = true;
};

struct ConsultRequest {
  std::string query;
  std::optional<double> alpha;
  std::optional<std::size_t> top_k;
  std::optional<RetrievalMode> mode;
  StageSwitches stages;
};

struct ReferenceBundle {
  std::vector<ScoredHit> hits;
  std::vector<std::string> statute_texts;  // aligned with hits
  KeywordSet keywords;
};

struct TraceEntry {
  std::string stage;
  std::string prompt;
  std::string reply;
  double latency_ms = 0.0;

  friend bool operator==(const TraceEntry&, const TraceEntry&) = default;
};

struct PipelineResponse {
  std::string answer;
  std::vector<TraceEntry> trace;
  ReferenceBundle references;
};

using Clock = std::function<std::chrono::steady_clock::time_point()>;

struct PipelineOptions {
  Templates templates = default_templates();
  std::size_t self_suggestion_rounds = 1;
  Clock clock;  // defaults to steady_clock::now
};

class Pipeline {
 public:
  Pipeline(const Retriever& retriever, LlmBackend& backend, PipelineOptions options = {});

  // Stages run strictly in order; each failure is re-thrown tagged with its
  // stage name. The trace holds one entry per executed stage (one per
  // self-suggestion round).
  PipelineResponse run(const ConsultRequest& request) const;

 private:
  const Retriever& retriever_;
  LlmBackend& backend_;
  PipelineOptions options_;
};

// "[id] title" header plus text for each hit, separated by blank lines;
// the sentinel when there are no hits.
std::string render_statutes(const ReferenceBundle& bundle, const StatuteCorpus& corpus, std::string_view sentinel);

// One JSON object per trace entry, one per line.
std::string trace_to_jsonl(const PipelineResponse& response, bool include_latency = true);

}  // namespace lexfuse::pipeline
