#include "lexfuse/text.hpp"

#include <gtest/gtest.h>

#include "lexfuse/hash.hpp"

namespace lexfuse::text {
namespace {

using Tokens = std::vector<std::string>;

TEST(Tokenize, SplitsOnPunctuationAndLowercases) {
  EXPECT_EQ(tokenize("What is the Statute of Limitations?"),
            (Tokens{"what", "is", "the", "statute", "of", "limitations"}));
  EXPECT_EQ(tokenize("  debt,debt;  DEBT "), (Tokens{"debt", "debt", "debt"}));
}

TEST(Tokenize, KeepsDigitsInsideWords) { EXPECT_EQ(tokenize("Art. 286b"), (Tokens{"art", "286b"})); }

TEST(Tokenize, HanIdeographsAreSingleTokens) {
  EXPECT_EQ(tokenize("公益诉讼"), (Tokens{"公", "益", "诉", "讼"}));
  EXPECT_EQ(tokenize("第7日，法院"), (Tokens{"第", "7", "日", "法", "院"}));
}

TEST(Tokenize, FoldsLatinGreekCyrillicAndFullwidth) {
  EXPECT_EQ(tokenize("ÉTAT Ωμέγα ЗАКОН"), (Tokens{"état", "ωμέγα", "закон"}));
  EXPECT_EQ(tokenize("ＡＢＣ１２"), (Tokens{"abc12"}));
}

TEST(Tokenize, MalformedBytesSeparate) { EXPECT_EQ(tokenize("ab\xff" "cd"), (Tokens{"ab", "cd"})); }

TEST(Tokenize, EmptyAndPunctuationOnly) {
  EXPECT_TRUE(tokenize("").empty());
  EXPECT_TRUE(tokenize(" ?!… \xE2\x80\x94，。").empty());
}

TEST(Whitespace, TrimAndCollapse) {
  EXPECT_EQ(trim("  a b \t\n"), "a b");
  EXPECT_EQ(trim("\xE3\x80\x80x\xE3\x80\x80"), "x");
  EXPECT_EQ(collapse_whitespace("  what   is\t\tthe\nlaw  "), "what is the law");
  EXPECT_TRUE(is_blank(" \t\n"));
  EXPECT_FALSE(is_blank(" x "));
}

TEST(Utf8Prefix, NeverSplitsCodePoints) {
  EXPECT_EQ(utf8_prefix("法院abc", 1), "法");
  EXPECT_EQ(utf8_prefix("法院abc", 3), "法院a");
  EXPECT_EQ(utf8_prefix("ab", 10), "ab");
}

TEST(Hash, MatchesIndependentComputation) {
  // FNV-1a 64 of "a" and the seeded hash of "debt", frozen from a separate script.
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(seeded_hash64("debt", 0), 0x555b9d7906887242ULL);
  EXPECT_EQ(seeded_hash64("statute", 42), 0xc626a868b0142742ULL);
}

TEST(Hash, FingerprintFieldsAreLengthPrefixed) {
  EXPECT_NE(Fingerprint().add("ab").add("c").value(), Fingerprint().add("a").add("bc").value());
  EXPECT_EQ(hex64(0xabcULL), "0000000000000abc");
}

}  // namespace
}  // namespace lexfuse::text
