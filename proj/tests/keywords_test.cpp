#include "lexfuse/keywords.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "fixtures.hpp"

namespace lexfuse {
namespace {

using fixtures::expect_error;
using Words = std::vector<std::string>;

ExtractorConfig lexical(std::unordered_set<std::string> stopwords, std::size_t max_keywords = 8) {
  ExtractorConfig c;
  c.stopwords = std::move(stopwords);
  c.max_keywords = max_keywords;
  return c;
}

const char* kQuery = "what is the statute of limitations for debt";

TEST(Lexical, DropsStopwordsInAppearanceOrder) {
  const auto ks = extract_keywords(kQuery, lexical({"what", "is", "the", "for", "of"}));
  EXPECT_EQ(ks.keywords, (Words{"statute", "limitations", "debt"}));
  EXPECT_FALSE(ks.fell_back_to_query);
}

TEST(Lexical, IdfRankingPicksRarestTerms) {
  // limitations (3.0) > debt (2.0) > statute (1.0); the two best are kept
  // and reported in query order.
  auto cfg = lexical({"what", "is", "the", "for", "of"}, 2);
  cfg.idf_table = IdfTable{{"limitations", 3.0}, {"debt", 2.0}, {"statute", 1.0}};
  EXPECT_EQ(extract_keywords(kQuery, cfg).keywords, (Words{"limitations", "debt"}));
}

TEST(Lexical, UnknownTokensTakeTableMaximum) {
  auto cfg = lexical({}, 1);
  cfg.idf_table = IdfTable{{"known", 5.0}, {"common", 1.0}};
  EXPECT_EQ(extract_keywords("common zzz known", cfg).keywords, (Words{"zzz"}));
}

TEST(Lexical, LengthRankingWithoutTable) {
  // statute (7) and limitations (11) beat debt (4); ties would keep the earlier token.
  EXPECT_EQ(extract_keywords(kQuery, lexical({"what", "is", "the", "for", "of"}, 2)).keywords,
            (Words{"statute", "limitations"}));
  EXPECT_EQ(extract_keywords("abc xyz def", lexical({}, 2)).keywords, (Words{"abc", "xyz"}));
}

TEST(Lexical, AllStopwordsFallsBackToWholeQuery) {
  const auto ks = extract_keywords("  What is   the ", lexical({"what", "is", "the"}));
  EXPECT_EQ(ks.keywords, (Words{"What is the"}));
  EXPECT_TRUE(ks.fell_back_to_query);
  EXPECT_EQ(extract_keywords("?!", lexical({})).keywords, (Words{"?!"}));
}

TEST(Lexical, DeduplicatesUnlessAllowed) {
  EXPECT_EQ(extract_keywords("debt Debt DEBT claim debt", lexical({})).keywords, (Words{"debt", "claim"}));
  auto cfg = lexical({});
  cfg.allow_duplicates = true;
  EXPECT_EQ(extract_keywords("debt claim debt", cfg).keywords, (Words{"debt", "claim", "debt"}));
}

TEST(Lexical, EmptyQueryAndBadConfig) {
  expect_error([] { extract_keywords("   ", lexical({})); }, ErrorKind::kInvalidInput, "empty");
  expect_error([] { extract_keywords("x", lexical({}, 0)); }, ErrorKind::kConfig, "max_keywords");
  ExtractorConfig remote;
  remote.kind = ExtractorKind::kRemote;
  expect_error([&] { remote.validate(); }, ErrorKind::kConfig, "endpoint");
}

TEST(Lexical, ChineseQueryYieldsCharacters) {
  EXPECT_EQ(extract_keywords("公益诉讼的原告", lexical({"的"}, 3)).keywords, (Words{"公", "益", "诉"}));
}

TEST(Lexical, PropertiesHoldOnRandomQueries) {
  std::mt19937_64 rng(11);
  const Words vocab = {"debt", "the", "contract", "of", "tenant", "deposit", "court", "a", "法", "院", "debt"};
  const auto stop = default_stopwords();
  for (int trial = 0; trial < 300; ++trial) {
    std::string q;
    for (auto n = 1 + rng() % 12; n > 0; --n) q += vocab[rng() % vocab.size()] + " ";
    const auto cfg = lexical(stop, 1 + rng() % 5);
    const auto ks = extract_keywords(q, cfg);
    ASSERT_GE(ks.size(), 1u);
    ASSERT_LE(ks.size(), cfg.max_keywords);
    ASSERT_EQ(std::set<std::string>(ks.keywords.begin(), ks.keywords.end()).size(), ks.size());
    ASSERT_EQ(extract_keywords(q, cfg), ks);
  }
}

TEST(Stopwords, FileIsFoldedLikeQueries) {
  std::istringstream in("The\n  OF \n\n# not special\n");
  const auto words = load_stopwords(in);
  EXPECT_TRUE(words.contains("the"));
  EXPECT_TRUE(words.contains("of"));
  EXPECT_TRUE(default_stopwords().contains("what"));
  EXPECT_NO_THROW(load_stopwords_file(fixtures::data_path("stopwords.txt")));
}

TEST(Idf, ParsesTable) {
  std::istringstream in("debt\t2.5\nstatute\t1\n\n");
  const auto table = load_idf_table(in);
  EXPECT_DOUBLE_EQ(table.at("debt"), 2.5);
  std::istringstream bad("debt 2.5\n");
  expect_error([&] { load_idf_table(bad); }, ErrorKind::kParse, "line 1");
  std::istringstream nan("debt\tabc\n");
  expect_error([&] { load_idf_table(nan); }, ErrorKind::kParse, "line 1");
}

TEST(Idf, ComputedFromCorpus) {
  StatuteCorpus corpus;
  corpus.add({"a", "", "debt claim", {}});
  corpus.add({"b", "", "debt contract", {}});
  const auto table = compute_idf(corpus);
  EXPECT_NEAR(table.at("debt"), std::log(3.0 / 3.0) + 1.0, 1e-15);
  EXPECT_NEAR(table.at("claim"), std::log(3.0 / 2.0) + 1.0, 1e-15);
}

TEST(EmbedKeywords, AlignsWithEmbedText) {
  ReferenceEmbedder e(16, 0);
  KeywordSet ks{{"a", "b"}, false};
  const auto ke = embed_keywords(ks, e);
  ASSERT_EQ(ke.size(), 2u);
  EXPECT_EQ(ke.vectors[0], e.embed_text("a"));
  EXPECT_EQ(ke.vectors[1], e.embed_text("b"));
  EXPECT_EQ(ke.source_keywords, ks.keywords);
  for (const auto& v : ke.vectors) EXPECT_EQ(v.dim(), 16u);
}

TEST(EmbedKeywords, FlagsZeroNormAndNamesFailingKeyword) {
  ReferenceEmbedder e(16, 0);
  const auto ke = embed_keywords(KeywordSet{{"debt", "?!"}, false}, e);
  EXPECT_EQ(ke.zero_norm_indices(), std::vector<std::size_t>{1});
  expect_error([&] { embed_keywords(KeywordSet{{"ok", " "}, false}, e); }, ErrorKind::kInvalidInput, "' '");
}

}  // namespace
}  // namespace lexfuse
