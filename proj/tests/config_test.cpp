#include "lexfuse/config.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <map>

#include "fixtures.hpp"

namespace lexfuse {
namespace {

using fixtures::expect_error;
using nlohmann::json;

EnvLookup env_of(std::map<std::string, std::string> vars) {
  return [vars = std::move(vars)](const std::string& name) -> std::optional<std::string> {
    auto it = vars.find(name);
    if (it == vars.end()) return std::nullopt;
    return it->second;
  };
}

class ConfigFile : public ::testing::Test {
 protected:
  void SetUp() override {
    path_ = std::filesystem::temp_directory_path() / ("lexfuse_cfg_" + std::to_string(::getpid()) + ".json");
  }
  void TearDown() override { std::filesystem::remove(path_); }
  std::string write(const json& doc) {
    std::ofstream(path_) << doc.dump();
    return path_.string();
  }
  std::filesystem::path path_;
};

TEST(Config, DefaultsAreValid) {
  const auto c = resolve_config(std::nullopt, env_of({}), {});
  EXPECT_EQ(c.embedder.dim, EmbedderConfig{}.dim);
  EXPECT_EQ(c.retrieval.alpha, 1.0);
  EXPECT_EQ(c.k_factor, 32.0);
  EXPECT_EQ(c.backend, BackendKind::kMock);
}

TEST_F(ConfigFile, FileOverridesDefaultsAndFlagsOverrideFile) {
  const auto path = write({{"embedder", {{"dim", 64}}},
                           {"retrieval", {{"alpha", 0.25}, {"top_k", 7}, {"mode", "query-only"}}},
                           {"arena", {{"k_factor", 16.0}, {"seed", 5}}}});
  const auto from_file = resolve_config(path, env_of({}), {});
  EXPECT_EQ(from_file.embedder.dim, 64u);
  EXPECT_EQ(from_file.retrieval.alpha, 0.25);
  EXPECT_EQ(from_file.retrieval.top_k, 7u);
  EXPECT_EQ(from_file.retrieval.mode, RetrievalMode::kQueryOnly);
  EXPECT_EQ(from_file.k_factor, 16.0);
  EXPECT_EQ(from_file.arena_seed, 5u);

  ConfigOverrides flags;
  flags.dim = 32;
  flags.alpha = 2.0;
  flags.k_factor = 8.0;
  flags.seed = 9;
  const auto with_flags = resolve_config(path, env_of({}), flags);
  EXPECT_EQ(with_flags.embedder.dim, 32u);
  EXPECT_EQ(with_flags.retrieval.alpha, 2.0);
  EXPECT_EQ(with_flags.retrieval.top_k, 7u);
  EXPECT_EQ(with_flags.k_factor, 8.0);
  EXPECT_EQ(with_flags.arena_seed, 9u);
  EXPECT_EQ(with_flags.embedder.seed, 9u);
}

TEST_F(ConfigFile, EnvSitsBetweenFileAndFlags) {
  const auto path = write({{"embedder", {{"kind", "remote"}, {"endpoint", "http://file:1/e"}}}});
  const auto env = env_of({{"LEXFUSE_EMBEDDER_ENDPOINT", "http://env:2/e"}});
  EXPECT_EQ(resolve_config(path, env_of({}), {}).embedder.endpoint, "http://file:1/e");
  EXPECT_EQ(resolve_config(path, env, {}).embedder.endpoint, "http://env:2/e");
  ConfigOverrides flags;
  flags.embedder_endpoint = "http://flag:3/e";
  EXPECT_EQ(resolve_config(path, env, flags).embedder.endpoint, "http://flag:3/e");
}

TEST_F(ConfigFile, RejectsUnknownKeysAndWrongTypes) {
  expect_error([&] { resolve_config(write({{"retrieval", {{"alpah", 1.0}}}}), env_of({}), {}); }, ErrorKind::kConfig,
               "retrieval.alpah");
  expect_error([&] { resolve_config(write({{"colour", 1}}), env_of({}), {}); }, ErrorKind::kConfig, "colour");
  expect_error([&] { resolve_config(write({{"embedder", {{"dim", "big"}}}}), env_of({}), {}); }, ErrorKind::kConfig,
               "embedder.dim");
  expect_error([&] { resolve_config(write({{"retrieval", {{"zero_keyword", "maybe"}}}}), env_of({}), {}); },
               ErrorKind::kConfig, "zero_keyword");
  std::ofstream(path_) << "{not json";
  expect_error([&] { resolve_config(path_.string(), env_of({}), {}); }, ErrorKind::kConfig, "config file");
  expect_error([] { resolve_config("/nonexistent/cfg.json", env_of({}), {}); }, ErrorKind::kIo, "cannot open");
}

TEST(Config, RemotePiecesNeedEndpoints) {
  ConfigOverrides flags;
  flags.backend = "remote";
  expect_error([&] { resolve_config(std::nullopt, env_of({}), flags); }, ErrorKind::kConfig, "endpoint");
  EXPECT_EQ(resolve_config(std::nullopt, env_of({{"LEXFUSE_LLM_ENDPOINT", "http://h:1/llm"}}), flags).llm_endpoint,
            "http://h:1/llm");
  ConfigOverrides bad;
  bad.alpha = -0.5;
  expect_error([&] { resolve_config(std::nullopt, env_of({}), bad); }, ErrorKind::kConfig, "alpha");
  ConfigOverrides k;
  k.k_factor = 0.0;
  expect_error([&] { resolve_config(std::nullopt, env_of({}), k); }, ErrorKind::kConfig, "K-factor");
}

TEST(Config, MaterializeExtractorLoadsStopwords) {
  AppConfig c;
  EXPECT_EQ(materialize_extractor(c).stopwords, default_stopwords());
  c.stopwords_path = fixtures::data_path("stopwords.txt");
  EXPECT_FALSE(materialize_extractor(c).stopwords.empty());
  c.idf_path = "/nonexistent/idf.tsv";
  EXPECT_THROW(materialize_extractor(c), Error);
}

}  // namespace
}  // namespace lexfuse
