#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace lexfuse {

// One retrievable unit of the legal database: an article, clause, or
// judicial-interpretation paragraph, at whatever granularity the ingestor chose.
struct StatuteRecord {
  std::string id;
  std::string title;
  std::string text;
  std::vector<std::string> tags;

  friend bool operator==(const StatuteRecord&, const StatuteRecord&) = default;
};

// Ordered, duplicate-free collection of statutes. Row j of an index always
// refers to records()[j], so insertion order is part of the contract.
class StatuteCorpus {
 public:
  StatuteCorpus() = default;

  // Validates and appends. Throws Error(kInvalidInput) on empty id, blank
  // text, or a duplicate id.
  void add(StatuteRecord record);

  const std::vector<StatuteRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }
  const StatuteRecord& at(std::size_t row) const { return records_.at(row); }

  // nullptr when absent.
  const StatuteRecord* find(std::string_view id) const;
  // Throws Error(kNotFound).
  const StatuteRecord& get(std::string_view id) const;
  // Row of `id`; throws Error(kNotFound).
  std::size_t row_of(std::string_view id) const;

  // Content hash over every field of every record, in order.
  std::uint64_t fingerprint() const;

  friend bool operator==(const StatuteCorpus& a, const StatuteCorpus& b) {
    return a.records_ == b.records_;
  }

 private:
  std::vector<StatuteRecord> records_;
  std::unordered_map<std::string, std::size_t> row_by_id_;
};

// Reads line-delimited JSON records {"id","title","text","tags"?}. Blank
// lines are skipped. Fail-fast: the first bad line aborts ingestion with an
// error citing its 1-based line number.
StatuteCorpus ingest_corpus(std::istream& source);
StatuteCorpus ingest_corpus_file(const std::string& path);

const StatuteRecord& get_statute(const StatuteCorpus& corpus, std::string_view id);

// Snapshot: a header line {"format":"lexfuse-corpus","version":1,"records":M}
// followed by exactly M record lines. Parse errors report a byte offset.
void save_corpus(const StatuteCorpus& corpus, std::ostream& out);
StatuteCorpus load_corpus(std::istream& in);

void save_corpus_file(const StatuteCorpus& corpus, const std::string& path);
StatuteCorpus load_corpus_file(const std::string& path);

}  // namespace lexfuse
