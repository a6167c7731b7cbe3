#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "json.hpp"
#include "lexfuse/arena.hpp"
#include "lexfuse/config.hpp"
#include "lexfuse/embedding.hpp"
#include "lexfuse/error.hpp"
#include "lexfuse/fusion.hpp"
#include "lexfuse/hash.hpp"
#include "lexfuse/index_io.hpp"
#include "lexfuse/keywords.hpp"
#include "lexfuse/pipeline.hpp"
#include "lexfuse/statute_store.hpp"

namespace {

using lexfuse::Error;
using lexfuse::ErrorKind;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

struct Options {
  std::optional<std::string> config_path;
  bool json = false;
  std::string log_level = "warn";
  lexfuse::ConfigOverrides overrides;

  std::string corpus_path;
  std::string out_path;
  std::string index_path;
  std::string query;
  std::string exam_path;
  std::vector<std::string> sheet_paths;
  std::string out_dir;
  bool no_self_suggestion = false;
  std::optional<std::string> trace_out;
};

void emit(const json& record) { std::cout << record.dump() << '\n'; }

void write_text_file(const std::filesystem::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kIo, "cannot write '" + path.string() + "'");
  out << contents;
  if (!out) throw Error(ErrorKind::kIo, "write to '" + path.string() + "' failed");
}

lexfuse::AppConfig resolve(const Options& opts) {
  return lexfuse::resolve_config(opts.config_path, lexfuse::process_env(), opts.overrides);
}

// --- option groups ---------------------------------------------------------------

void add_embedder_options(CLI::App* cmd, Options& o) {
  cmd->add_option("--embedder", o.overrides.embedder_kind, "Embedder kind: reference, file or remote")
      ->check(CLI::IsMember({"reference", "file", "remote"}));
  cmd->add_option("--dim", o.overrides.dim, "Embedding dimension")->check(CLI::PositiveNumber);
  cmd->add_option("--embedder-endpoint", o.overrides.embedder_endpoint, "Remote embedding service URL");
  cmd->add_option("--sidecar", o.overrides.sidecar_path, "Precomputed embedding file for --embedder file");
  cmd->add_option("--cache-capacity", o.overrides.cache_capacity, "Embedding cache entries (0 disables)");
}

void add_retrieval_options(CLI::App* cmd, Options& o) {
  cmd->add_option("--alpha", o.overrides.alpha, "Weight of the whole-query direction in each fused vector");
  cmd->add_option("--top-k", o.overrides.top_k, "Number of statutes returned");
  cmd->add_option("--mode", o.overrides.mode, "fusion or query_only");
  cmd->add_option("--threads", o.overrides.threads, "Scan threads");
  cmd->add_flag("--mean-scores{true}", o.overrides.mean_scores, "Average fused scores over keywords");
  cmd->add_option("--extractor", o.overrides.extractor_kind, "Keyword extractor: lexical or remote")
      ->check(CLI::IsMember({"lexical", "remote"}));
  cmd->add_option("--max-keywords", o.overrides.max_keywords, "Cap on extracted keywords");
  cmd->add_option("--stopwords", o.overrides.stopwords_path, "Stopword file, one token per line");
  cmd->add_option("--idf", o.overrides.idf_path, "idf table, token<TAB>weight per line");
  cmd->add_flag("--allow-duplicate-keywords{true}", o.overrides.allow_duplicate_keywords,
                "Score repeated keywords once per occurrence");
  cmd->add_option("--extractor-endpoint", o.overrides.extractor_endpoint, "Remote keyword extractor URL");
}

// --- shared loading ----------------------------------------------------------------

struct LoadedIndex {
  lexfuse::IndexSnapshot snapshot;
  lexfuse::StatuteCorpus corpus;
  std::unique_ptr<lexfuse::Embedder> embedder;
};

// The index records how it was embedded; query-time flags may only change
// where the embedder runs, not what it computes.
lexfuse::EmbedderConfig query_embedder_config(const lexfuse::IndexSnapshot& snap, const lexfuse::AppConfig& app,
                                              const lexfuse::ConfigOverrides& flags) {
  if (!snap.embedder) return app.embedder;
  lexfuse::EmbedderConfig cfg = *snap.embedder;
  if (flags.embedder_kind && lexfuse::embedder_kind_from_string(*flags.embedder_kind) != cfg.kind) {
    throw Error(ErrorKind::kConfig, "index was built with the " + std::string(to_string(cfg.kind)) +
                                        " embedder, not " + *flags.embedder_kind);
  }
  if (flags.dim && *flags.dim != cfg.dim) {
    throw Error(ErrorKind::kConfig, "index dim is " + std::to_string(cfg.dim) + ", not " + std::to_string(*flags.dim));
  }
  if (flags.seed && *flags.seed != cfg.seed) {
    throw Error(ErrorKind::kConfig, "index was built with seed " + std::to_string(cfg.seed));
  }
  if (!app.embedder.endpoint.empty()) cfg.endpoint = app.embedder.endpoint;
  if (!app.embedder.sidecar_path.empty()) cfg.sidecar_path = app.embedder.sidecar_path;
  cfg.cache_capacity = app.embedder.cache_capacity;
  cfg.timeout_seconds = app.embedder.timeout_seconds;
  cfg.validate();
  return cfg;
}

LoadedIndex load_for_query(const Options& opts, const lexfuse::AppConfig& app) {
  LoadedIndex out;
  out.snapshot = lexfuse::load_index_file(opts.index_path);
  if (!opts.corpus_path.empty()) {
    out.corpus = lexfuse::load_corpus_file(opts.corpus_path);
    lexfuse::check_index_matches(out.snapshot.matrix, out.corpus);
  } else if (out.snapshot.corpus) {
    out.corpus = *out.snapshot.corpus;
  } else {
    throw Error(ErrorKind::kInvalidInput, "index has no embedded corpus; pass --corpus");
  }
  out.embedder = lexfuse::make_embedder(query_embedder_config(out.snapshot, app, opts.overrides));
  return out;
}

json hit_record(const lexfuse::ScoredHit& hit) {
  return {{"type", "hit"}, {"rank", hit.rank}, {"id", hit.statute_id}, {"row", hit.row}, {"score", hit.score}};
}

// --- subcommands -------------------------------------------------------------------

int cmd_ingest(const Options& opts) {
  const auto corpus = lexfuse::ingest_corpus_file(opts.corpus_path);
  lexfuse::save_corpus_file(corpus, opts.out_path);
  if (opts.json) {
    emit({{"type", "ingest"},
          {"records", corpus.size()},
          {"fingerprint", lexfuse::hex64(corpus.fingerprint())},
          {"out", opts.out_path}});
  } else {
    std::cout << fmt::format("ingested {} records into {}\n", corpus.size(), opts.out_path);
  }
  return kExitOk;
}

int cmd_build_index(const Options& opts) {
  const auto app = resolve(opts);
  auto corpus = lexfuse::load_corpus_file(opts.corpus_path);
  auto embedder = lexfuse::make_embedder(app.embedder);
  spdlog::info("embedding {} statutes with the {} embedder (dim {})", corpus.size(), to_string(app.embedder.kind),
               app.embedder.dim);
  lexfuse::IndexSnapshot snap{lexfuse::build_index(corpus, *embedder), app.embedder, std::move(corpus)};
  lexfuse::save_index_file(snap, opts.out_path);
  if (opts.json) {
    emit({{"type", "index"},
          {"rows", snap.matrix.rows()},
          {"dim", snap.matrix.dim()},
          {"fingerprint", lexfuse::hex64(snap.matrix.corpus_fingerprint())},
          {"out", opts.out_path}});
  } else {
    std::cout << fmt::format("indexed {} statutes (dim {}) into {}\n", snap.matrix.rows(), snap.matrix.dim(),
                             opts.out_path);
  }
  return kExitOk;
}

int cmd_query(const Options& opts) {
  const auto app = resolve(opts);
  auto loaded = load_for_query(opts, app);
  auto extractor = lexfuse::make_extractor(lexfuse::materialize_extractor(app));
  const lexfuse::Retriever retriever(loaded.corpus, loaded.snapshot.matrix, *loaded.embedder, *extractor,
                                     app.retrieval);
  const auto result = retriever.retrieve(opts.query);
  if (opts.json) {
    emit({{"type", "query"},
          {"query", opts.query},
          {"mode", to_string(result.effective_mode)},
          {"keywords", result.keywords.keywords},
          {"warnings", result.warnings}});
    for (const auto& hit : result.hits) emit(hit_record(hit));
  } else {
    std::string keywords;
    for (const auto& kw : result.keywords.keywords) keywords += (keywords.empty() ? "" : ", ") + kw;
    std::cout << "keywords: " << (keywords.empty() ? "(none)" : keywords) << '\n';
    for (const auto& hit : result.hits) std::cout << fmt::format("{}\t{}\t{:.6f}\n", hit.rank, hit.statute_id, hit.score);
  }
  return kExitOk;
}

int cmd_eval_exam(const Options& opts) {
  const auto exam = lexfuse::arena::load_exam_file(opts.exam_path);
  for (const auto& path : opts.sheet_paths) {
    const auto sheet = lexfuse::arena::load_sheet_file(path);
    lexfuse::arena::validate_sheet(sheet, exam);
    const auto report = lexfuse::arena::grade(sheet, exam);
    if (opts.json) {
      json per_question = json::object();
      for (std::size_t i = 0; i < exam.size(); ++i) per_question[exam.questions()[i].id] = report.per_question[i];
      emit({{"type", "grade"},
            {"model", report.model_name},
            {"correct", report.correct},
            {"total", report.total},
            {"accuracy", report.accuracy},
            {"per_question", per_question}});
    } else {
      std::cout << fmt::format("{}\t{}/{}\t{:.4f}\n", report.model_name, report.correct, report.total,
                               report.accuracy);
    }
  }
  return kExitOk;
}

int cmd_arena(const Options& opts) {
  const auto app = resolve(opts);
  const auto exam = lexfuse::arena::load_exam_file(opts.exam_path);
  std::vector<lexfuse::arena::AnswerSheet> sheets;
  for (const auto& path : opts.sheet_paths) {
    sheets.push_back(lexfuse::arena::load_sheet_file(path));
    lexfuse::arena::validate_sheet(sheets.back(), exam);
  }
  const auto result = lexfuse::arena::run_tournament(sheets, exam, app.arena_seed, app.k_factor);

  const std::filesystem::path dir(opts.out_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::kIo, "cannot create '" + dir.string() + "': " + ec.message());
  write_text_file(dir / "ratings.txt", lexfuse::arena::export_ratings(result.ratings));
  write_text_file(dir / "winrate.csv", lexfuse::arena::export_matrix_csv(result.matrix));
  write_text_file(dir / "battles.log", lexfuse::arena::export_battle_log(result.log));

  if (opts.json) {
    std::cout << lexfuse::arena::export_ratings_records(result.ratings);
    std::cout << lexfuse::arena::export_matrix_records(result.matrix);
  } else {
    std::cout << lexfuse::arena::export_ratings(result.ratings);
  }
  return kExitOk;
}

int cmd_pipeline(const Options& opts) {
  const auto app = resolve(opts);
  auto loaded = load_for_query(opts, app);
  auto extractor = lexfuse::make_extractor(lexfuse::materialize_extractor(app));
  const lexfuse::Retriever retriever(loaded.corpus, loaded.snapshot.matrix, *loaded.embedder, *extractor,
                                     app.retrieval);

  std::unique_ptr<lexfuse::pipeline::LlmBackend> backend;
  if (app.backend == lexfuse::BackendKind::kRemote) {
    backend = std::make_unique<lexfuse::pipeline::RemoteBackend>(app.llm_endpoint, app.llm_timeout_seconds);
  } else {
    backend = std::make_unique<lexfuse::pipeline::MockBackend>();
  }

  lexfuse::pipeline::PipelineOptions popts;
  if (!app.templates_dir.empty()) popts.templates = lexfuse::pipeline::load_templates(app.templates_dir);
  popts.self_suggestion_rounds = app.self_suggestion_rounds;
  const lexfuse::pipeline::Pipeline pipeline(retriever, *backend, popts);

  lexfuse::pipeline::ConsultRequest request;
  request.query = opts.query;
  request.stages.self_suggestion = !opts.no_self_suggestion && app.self_suggestion_rounds > 0;
  const auto response = pipeline.run(request);

  if (opts.trace_out) write_text_file(*opts.trace_out, lexfuse::pipeline::trace_to_jsonl(response));
  if (opts.json) {
    std::cout << lexfuse::pipeline::trace_to_jsonl(response);
    json hits = json::array();
    for (const auto& hit : response.references.hits) hits.push_back(hit_record(hit));
    emit({{"type", "answer"}, {"answer", response.answer}, {"references", hits}});
  } else {
    std::cout << response.answer << '\n';
  }
  return kExitOk;
}

int run(int argc, char** argv) {
  Options opts;
  CLI::App app{"Statute retrieval with keyword fusion, exam grading and an Elo arena"};
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);
  app.fallthrough();
  app.add_option("--config", opts.config_path, "JSON config file");
  app.add_flag("--json", opts.json, "Line-delimited JSON on stdout");
  app.add_option("--log-level", opts.log_level, "trace, debug, info, warn, error or off")
      ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "off"}));
  app.add_option("--seed", opts.overrides.seed, "Seed for every stochastic component");

  auto* ingest = app.add_subcommand("ingest", "Validate a corpus file and write a snapshot");
  ingest->add_option("--corpus", opts.corpus_path, "Line-delimited statute records")->required();
  ingest->add_option("--out", opts.out_path, "Snapshot path")->required();

  auto* build = app.add_subcommand("build-index", "Embed a corpus snapshot into an index");
  build->add_option("--corpus", opts.corpus_path, "Corpus snapshot")->required();
  build->add_option("--out", opts.out_path, "Index path")->required();
  add_embedder_options(build, opts);

  auto* query = app.add_subcommand("query", "Retrieve the top statutes for a question");
  query->add_option("--idx", opts.index_path, "Index path")->required();
  query->add_option("--corpus", opts.corpus_path, "Corpus snapshot (default: the one inside the index)");
  query->add_option("query", opts.query, "Question text")->required();
  add_embedder_options(query, opts);
  add_retrieval_options(query, opts);

  auto* eval = app.add_subcommand("eval-exam", "Grade answer sheets against an exam");
  eval->add_option("--exam", opts.exam_path, "Exam file")->required();
  eval->add_option("--sheet", opts.sheet_paths, "Answer sheet(s)")->required();

  auto* arena = app.add_subcommand("arena", "Run a seeded Elo tournament between answer sheets");
  arena->add_option("--exam", opts.exam_path, "Exam file")->required();
  arena->add_option("--sheets", opts.sheet_paths, "Answer sheets")->required();
  arena->add_option("--k", opts.overrides.k_factor, "Elo K-factor");
  arena->add_option("--out-dir", opts.out_dir, "Directory for ratings.txt, winrate.csv, battles.log")->required();

  auto* pipe = app.add_subcommand("pipeline", "Answer a question with retrieved statutes and an LLM backend");
  pipe->add_option("--idx", opts.index_path, "Index path")->required();
  pipe->add_option("--corpus", opts.corpus_path, "Corpus snapshot (default: the one inside the index)");
  pipe->add_option("query", opts.query, "Question text")->required();
  pipe->add_option("--backend", opts.overrides.backend, "mock or remote")->check(CLI::IsMember({"mock", "remote"}));
  pipe->add_option("--llm-endpoint", opts.overrides.llm_endpoint, "Remote LLM URL");
  pipe->add_option("--templates", opts.overrides.templates_dir, "Directory with answer.txt and critique.txt");
  pipe->add_option("--rounds", opts.overrides.self_suggestion_rounds, "Self-suggestion rounds");
  pipe->add_flag("--no-self-suggestion", opts.no_self_suggestion, "Make the draft the final answer");
  pipe->add_option("--trace-out", opts.trace_out, "Write the stage trace as JSON lines");
  add_embedder_options(pipe, opts);
  add_retrieval_options(pipe, opts);

  spdlog::set_default_logger(spdlog::stderr_color_mt("lexfuse"));

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e, std::cerr, std::cerr);
    return kExitValidation;
  }

  spdlog::set_level(spdlog::level::from_str(opts.log_level));

  if (*ingest) return cmd_ingest(opts);
  if (*build) return cmd_build_index(opts);
  if (*query) return cmd_query(opts);
  if (*eval) return cmd_eval_exam(opts);
  if (*arena) return cmd_arena(opts);
  return cmd_pipeline(opts);
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const Error& e) {
    spdlog::error("{}: {}", lexfuse::to_string(e.kind()), e.what());
    return lexfuse::is_validation_error(e.kind()) ? kExitValidation : kExitRuntime;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kExitRuntime;
  }
}
