#pragma once

#include <gmock/gmock.h>
#include <gtest/gtest.h>

#include <string>
#include <vector>

#include "lexfuse/error.hpp"
#include "lexfuse/fusion.hpp"
#include "lexfuse/statute_store.hpp"
#include "oracle.hpp"

namespace fixtures {

inline lexfuse::LawMatrix to_matrix(const std::vector<oracle::Vec>& rows, std::uint64_t fingerprint = 0) {
  const std::size_t dim = rows.empty() ? 1 : rows.front().size();
  std::vector<double> values;
  std::vector<double> norms;
  for (const auto& r : rows) {
    values.insert(values.end(), r.begin(), r.end());
    norms.push_back(lexfuse::l2_norm(r));
  }
  return lexfuse::LawMatrix(dim, std::move(values), std::move(norms), fingerprint);
}

inline lexfuse::KeywordEmbeddings to_keywords(const std::vector<oracle::Vec>& rows) {
  lexfuse::KeywordEmbeddings out;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.vectors.emplace_back(rows[i]);
    out.source_keywords.push_back("k" + std::to_string(i));
  }
  return out;
}

// Synthetic corpus whose ids are r0, r1, ...
inline lexfuse::StatuteCorpus numbered_corpus(std::size_t m) {
  lexfuse::StatuteCorpus corpus;
  for (std::size_t j = 0; j < m; ++j) corpus.add({"r" + std::to_string(j), "", "row " + std::to_string(j), {}});
  return corpus;
}

inline std::string data_path(const std::string& name) { return std::string(LEXFUSE_DATA_DIR) + "/" + name; }

// Runs `fn`, expecting an Error of `kind` whose message contains `needle`.
template <typename Fn>
void expect_error(Fn fn, lexfuse::ErrorKind kind, const std::string& needle) {
  try {
    fn();
    ADD_FAILURE() << "expected an error containing '" << needle << "'";
  } catch (const lexfuse::Error& e) {
    EXPECT_EQ(e.kind(), kind) << e.what();
    EXPECT_THAT(e.what(), ::testing::HasSubstr(needle));
  }
}

}  // namespace fixtures
