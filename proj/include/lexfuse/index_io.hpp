#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include "lexfuse/embedding.hpp"
#include "lexfuse/fusion.hpp"
#include "lexfuse/statute_store.hpp"

// Index snapshot, little-endian:
//
//   char[8]   magic "LXFINDEX"
//   u32       version (1)
//   u32       reserved (0)
//   u64       dim d
//   u64       rows M
//   u64       corpus fingerprint
//   f64[M*d]  row-major embeddings
//   f64[M]    row norms
//   u64 + []  embedder config as JSON (may be empty)
//   u64 + []  corpus snapshot (may be empty)
//   u64       checksum of every preceding byte
namespace lexfuse {

struct IndexSnapshot {
  LawMatrix matrix;
  std::optional<EmbedderConfig> embedder;
  std::optional<StatuteCorpus> corpus;
};

void save_index(const IndexSnapshot& snapshot, std::ostream& out);
void save_index(const LawMatrix& matrix, std::ostream& out);

// Throws kParse (with byte offset) on corruption or truncation, and
// kStaleIndex if an embedded corpus does not match the header fingerprint.
IndexSnapshot load_index(std::istream& in);
// Additionally requires the index to belong to `corpus`.
IndexSnapshot load_index(std::istream& in, const StatuteCorpus& corpus);

// Throws kStaleIndex when `matrix` was not built from `corpus`.
void check_index_matches(const LawMatrix& matrix, const StatuteCorpus& corpus);

void save_index_file(const IndexSnapshot& snapshot, const std::string& path);
IndexSnapshot load_index_file(const std::string& path);

}  // namespace lexfuse
