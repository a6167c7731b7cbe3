#include "lexfuse/pipeline.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "lexfuse/error.hpp"
#include "lexfuse/hash.hpp"
#include "lexfuse/text.hpp"

namespace lexfuse::pipeline {
namespace {

bool is_slot_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
}

// Walks `tmpl`, calling on_text for literal runs and on_slot for slots.
template <typename OnText, typename OnSlot>
void scan_template(std::string_view tmpl, OnText on_text, OnSlot on_slot) {
  std::size_t i = 0;
  while (i < tmpl.size()) {
    const char c = tmpl[i];
    if (c == '{' && i + 1 < tmpl.size() && tmpl[i + 1] == '{') {
      on_text("{");
      i += 2;
    } else if (c == '}' && i + 1 < tmpl.size() && tmpl[i + 1] == '}') {
      on_text("}");
      i += 2;
    } else if (c == '{') {
      const auto close = tmpl.find('}', i + 1);
      const auto name = close == std::string_view::npos ? std::string_view{} : tmpl.substr(i + 1, close - i - 1);
      if (name.empty() || !std::all_of(name.begin(), name.end(), is_slot_char)) {
        throw Error(ErrorKind::kConfig, "template: malformed slot at offset " + std::to_string(i));
      }
      on_slot(std::string(name));
      i = close + 1;
    } else if (c == '}') {
      throw Error(ErrorKind::kConfig, "template: unmatched '}' at offset " + std::to_string(i));
    } else {
      const auto next = tmpl.find_first_of("{}", i);
      const auto end = next == std::string_view::npos ? tmpl.size() : next;
      on_text(tmpl.substr(i, end - i));
      i = end;
    }
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open template '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void require_slots(std::string_view name, std::string_view tmpl, const std::set<std::string>& allowed) {
  for (const auto& slot : template_slots(tmpl)) {
    if (!allowed.contains(slot)) {
      throw Error(ErrorKind::kConfig, "template '" + std::string(name) + "' uses unknown slot {" + slot + "}");
    }
  }
}

std::string join_keywords(const KeywordSet& keywords) {
  if (keywords.keywords.empty()) return "(none)";
  std::string out;
  for (const auto& kw : keywords.keywords) {
    if (!out.empty()) out += ", ";
    out += kw;
  }
  return out;
}

}  // namespace

std::string render_prompt(std::string_view tmpl, const std::map<std::string, std::string>& bindings) {
  std::string out;
  out.reserve(tmpl.size());
  scan_template(
      tmpl, [&](std::string_view literal) { out.append(literal); },
      [&](const std::string& slot) {
        auto it = bindings.find(slot);
        if (it == bindings.end()) throw Error(ErrorKind::kConfig, "template slot {" + slot + "} has no binding");
        out += it->second;
      });
  return out;
}

std::vector<std::string> template_slots(std::string_view tmpl) {
  std::vector<std::string> slots;
  scan_template(
      tmpl, [](std::string_view) {},
      [&](const std::string& slot) {
        if (std::find(slots.begin(), slots.end(), slot) == slots.end()) slots.push_back(slot);
      });
  return slots;
}

void Templates::validate() const {
  require_slots("answer", answer, {"query", "keywords", "statutes"});
  require_slots("critique", critique, {"query", "keywords", "statutes", "draft"});
  if (text::is_blank(answer)) throw Error(ErrorKind::kConfig, "answer template is empty");
  if (text::is_blank(critique)) throw Error(ErrorKind::kConfig, "critique template is empty");
}

Templates default_templates() {
  Templates t;
  t.answer =
      "You are a legal assistant. Answer the user's question using the statutes below. "
      "Cite statutes by their id in square brackets.\n\n"
      "Question: {query}\n"
      "Keywords: {keywords}\n\n"
      "Statutes:\n{statutes}\n\n"
      "Answer:";
  t.critique =
      "Review the draft answer against the statutes. Remove any claim the statutes do not "
      "support, correct any misquoted provision, and return the revised answer only.\n\n"
      "Question: {query}\n\n"
      "Statutes:\n{statutes}\n\n"
      "Draft answer:\n{draft}\n\n"
      "Revised answer:";
  return t;
}

Templates load_templates(const std::string& dir) {
  const std::filesystem::path base(dir);
  Templates t;
  t.answer = read_file(base / "answer.txt");
  t.critique = read_file(base / "critique.txt");
  if (std::filesystem::exists(base / "no_statutes.txt")) t.no_statutes = text::trim(read_file(base / "no_statutes.txt"));
  t.validate();
  return t;
}

std::string MockBackend::complete(std::string_view prompt) {
  if (prompt.empty()) throw Error(ErrorKind::kInvalidInput, "mock backend: empty prompt");
  return "mock:" + hex64(mix64(fnv1a64(prompt))) + ":" + std::string(text::utf8_prefix(prompt, prefix_));
}

std::string render_statutes(const ReferenceBundle& bundle, const StatuteCorpus& corpus, std::string_view sentinel) {
  if (bundle.hits.empty()) return std::string(sentinel);
  std::string out;
  for (std::size_t i = 0; i < bundle.hits.size(); ++i) {
    const auto& hit = bundle.hits[i];
    if (i > 0) out += "\n\n";
    const auto* rec = corpus.find(hit.statute_id);
    out += "[" + hit.statute_id + "]";
    if (rec != nullptr && !rec->title.empty()) out += " " + rec->title;
    out += "\n";
    out += i < bundle.statute_texts.size() ? bundle.statute_texts[i] : (rec != nullptr ? rec->text : std::string());
  }
  return out;
}

Pipeline::Pipeline(const Retriever& retriever, LlmBackend& backend, PipelineOptions options)
    : retriever_(retriever), backend_(backend), options_(std::move(options)) {
  options_.templates.validate();
  if (!options_.clock) options_.clock = [] { return std::chrono::steady_clock::now(); };
}

PipelineResponse Pipeline::run(const ConsultRequest& request) const {
  if (text::is_blank(request.query)) throw Error(ErrorKind::kInvalidInput, "stage 'consult': query is empty");
  PipelineResponse response;
  const Clock& now = options_.clock;
  auto elapsed_ms = [](auto start, auto end) {
    return std::chrono::duration<double, std::milli>(end - start).count();
  };

  // consult
  std::string query = request.query;
  if (request.stages.consult) {
    const auto start = now();
    query = text::collapse_whitespace(request.query);
    response.trace.push_back({std::string(kStageConsult), request.query, query, elapsed_ms(start, now())});
  }

  // reference
  RetrievalConfig cfg = retriever_.config();
  if (request.alpha) cfg.alpha = *request.alpha;
  if (request.top_k) cfg.top_k = *request.top_k;
  if (request.mode) cfg.mode = *request.mode;
  std::string statutes = options_.templates.no_statutes;
  std::string answer_prompt;
  auto bindings = [&](const std::string* draft) {
    std::map<std::string, std::string> b = {{"query", query},
                                            {"keywords", join_keywords(response.references.keywords)},
                                            {"statutes", statutes}};
    if (draft != nullptr) b["draft"] = *draft;
    return b;
  };
  if (request.stages.reference) {
    const auto start = now();
    try {
      RetrievalResult retrieved = retriever_.retrieve(query, cfg);
      response.references.hits = std::move(retrieved.hits);
      response.references.keywords = std::move(retrieved.keywords);
      for (const auto& hit : response.references.hits) {
        response.references.statute_texts.push_back(retriever_.corpus().at(hit.row).text);
      }
      statutes = render_statutes(response.references, retriever_.corpus(), options_.templates.no_statutes);
      answer_prompt = render_prompt(options_.templates.answer, bindings(nullptr));
    } catch (const Error& e) {
      throw e.in_stage(kStageReference);
    }
    std::string summary;
    for (const auto& hit : response.references.hits) {
      summary += fmt::format("{}\t{}\t{:.6f}\n", hit.rank, hit.statute_id, hit.score);
    }
    response.trace.push_back({std::string(kStageReference), answer_prompt, summary, elapsed_ms(start, now())});
  } else {
    try {
      answer_prompt = render_prompt(options_.templates.answer, bindings(nullptr));
    } catch (const Error& e) {
      throw e.in_stage(kStageDraft);
    }
  }

  // draft
  std::string current;
  {
    const auto start = now();
    try {
      current = backend_.complete(answer_prompt);
    } catch (const Error& e) {
      throw e.in_stage(kStageDraft);
    }
    response.trace.push_back({std::string(kStageDraft), answer_prompt, current, elapsed_ms(start, now())});
  }

  // self-suggestion
  if (request.stages.self_suggestion) {
    for (std::size_t round = 0; round < options_.self_suggestion_rounds; ++round) {
      const auto start = now();
      std::string prompt;
      std::string revised;
      try {
        prompt = render_prompt(options_.templates.critique, bindings(&current));
        revised = backend_.complete(prompt);
      } catch (const Error& e) {
        throw e.in_stage(kStageSelfSuggestion);
      }
      response.trace.push_back({std::string(kStageSelfSuggestion), prompt, revised, elapsed_ms(start, now())});
      current = std::move(revised);
    }
  }

  response.answer = std::move(current);
  return response;
}

std::string trace_to_jsonl(const PipelineResponse& response, bool include_latency) {
  std::string out;
  for (const auto& entry : response.trace) {
    nlohmann::json j = {{"stage", entry.stage}, {"prompt", entry.prompt}, {"reply", entry.reply}};
    if (include_latency) j["latency_ms"] = entry.latency_ms;
    out += j.dump() + '\n';
  }
  return out;
}

}  // namespace lexfuse::pipeline
