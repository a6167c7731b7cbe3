#include "lexfuse/statute_store.hpp"

#include <fstream>
#include <istream>
#include <ostream>

#include "json.hpp"
#include "lexfuse/error.hpp"
#include "lexfuse/hash.hpp"
#include "lexfuse/text.hpp"

namespace lexfuse {
namespace {

using nlohmann::json;

constexpr std::string_view kSnapshotFormat = "lexfuse-corpus";
constexpr int kSnapshotVersion = 1;

std::string string_field(const json& obj, const char* name, const std::string& where) {
  auto it = obj.find(name);
  if (it == obj.end()) throw Error(ErrorKind::kInvalidInput, where + ": missing field '" + name + "'");
  if (!it->is_string()) throw Error(ErrorKind::kInvalidInput, where + ": field '" + name + "' must be a string");
  return it->get<std::string>();
}

StatuteRecord record_from_json(const json& obj, const std::string& where) {
  if (!obj.is_object()) throw Error(ErrorKind::kInvalidInput, where + ": record must be a JSON object");
  StatuteRecord rec;
  rec.id = string_field(obj, "id", where);
  rec.title = obj.contains("title") ? string_field(obj, "title", where) : std::string();
  rec.text = string_field(obj, "text", where);
  if (auto it = obj.find("tags"); it != obj.end() && !it->is_null()) {
    if (!it->is_array()) throw Error(ErrorKind::kInvalidInput, where + ": 'tags' must be an array of strings");
    for (const auto& tag : *it) {
      if (!tag.is_string()) throw Error(ErrorKind::kInvalidInput, where + ": 'tags' must be an array of strings");
      rec.tags.push_back(tag.get<std::string>());
    }
  }
  return rec;
}

json record_to_json(const StatuteRecord& rec) {
  json obj = {{"id", rec.id}, {"title", rec.title}, {"text", rec.text}};
  if (!rec.tags.empty()) obj["tags"] = rec.tags;
  return obj;
}

}  // namespace

void StatuteCorpus::add(StatuteRecord record) {
  if (record.id.empty()) throw Error(ErrorKind::kInvalidInput, "statute id must be non-empty");
  if (text::is_blank(record.text)) {
    throw Error(ErrorKind::kInvalidInput, "statute '" + record.id + "' has empty text");
  }
  if (row_by_id_.contains(record.id)) {
    throw Error(ErrorKind::kInvalidInput, "duplicate statute id '" + record.id + "'");
  }
  row_by_id_.emplace(record.id, records_.size());
  records_.push_back(std::move(record));
}

const StatuteRecord* StatuteCorpus::find(std::string_view id) const {
  auto it = row_by_id_.find(std::string(id));
  return it == row_by_id_.end() ? nullptr : &records_[it->second];
}

const StatuteRecord& StatuteCorpus::get(std::string_view id) const {
  return records_[row_of(id)];
}

std::size_t StatuteCorpus::row_of(std::string_view id) const {
  auto it = row_by_id_.find(std::string(id));
  if (it == row_by_id_.end()) throw Error(ErrorKind::kNotFound, "statute '" + std::string(id) + "' not found");
  return it->second;
}

std::uint64_t StatuteCorpus::fingerprint() const {
  Fingerprint fp;
  fp.add(static_cast<std::uint64_t>(records_.size()));
  for (const auto& rec : records_) {
    fp.add(rec.id).add(rec.title).add(rec.text).add(static_cast<std::uint64_t>(rec.tags.size()));
    for (const auto& tag : rec.tags) fp.add(tag);
  }
  return fp.value();
}

StatuteCorpus ingest_corpus(std::istream& source) {
  StatuteCorpus corpus;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(source, line)) {
    ++line_no;
    if (text::is_blank(line)) continue;
    const std::string where = "line " + std::to_string(line_no);
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::exception& e) {
      throw Error(ErrorKind::kParse, where + ": malformed record: " + e.what());
    }
    StatuteRecord rec = record_from_json(obj, where);
    if (rec.id.empty()) throw Error(ErrorKind::kInvalidInput, where + ": empty id");
    if (text::is_blank(rec.text)) throw Error(ErrorKind::kInvalidInput, where + ": empty text for id '" + rec.id + "'");
    if (corpus.find(rec.id) != nullptr) {
      throw Error(ErrorKind::kInvalidInput, where + ": duplicate id '" + rec.id + "'");
    }
    corpus.add(std::move(rec));
  }
  return corpus;
}

StatuteCorpus ingest_corpus_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open corpus file '" + path + "'");
  return ingest_corpus(in);
}

const StatuteRecord& get_statute(const StatuteCorpus& corpus, std::string_view id) {
  return corpus.get(id);
}

void save_corpus(const StatuteCorpus& corpus, std::ostream& out) {
  json header = {{"format", kSnapshotFormat}, {"version", kSnapshotVersion}, {"records", corpus.size()}};
  out << header.dump() << '\n';
  for (const auto& rec : corpus.records()) out << record_to_json(rec).dump() << '\n';
}

StatuteCorpus load_corpus(std::istream& in) {
  std::uint64_t offset = 0;
  std::string line;
  auto parse_error = [&](const std::string& what) {
    return Error(ErrorKind::kParse, "corpus snapshot: " + what + " at byte offset " + std::to_string(offset));
  };
  auto next_line = [&]() -> bool {
    if (!std::getline(in, line)) return false;
    if (in.eof()) throw parse_error("unterminated final line");
    return true;
  };

  if (!next_line()) throw parse_error("missing header");
  json header;
  try {
    header = json::parse(line);
  } catch (const json::exception&) {
    throw parse_error("malformed header");
  }
  if (!header.is_object() || header.value("format", "") != kSnapshotFormat) throw parse_error("not a corpus snapshot");
  if (header.value("version", 0) != kSnapshotVersion) throw parse_error("unsupported version");
  if (!header.contains("records") || !header["records"].is_number_unsigned()) throw parse_error("missing record count");
  const auto count = header["records"].get<std::uint64_t>();
  offset += line.size() + 1;

  StatuteCorpus corpus;
  for (std::uint64_t i = 0; i < count; ++i) {
    if (!next_line()) throw parse_error("truncated: expected " + std::to_string(count) + " records, found " + std::to_string(i));
    try {
      corpus.add(record_from_json(json::parse(line), "record " + std::to_string(i)));
    } catch (const json::exception&) {
      throw parse_error("malformed record");
    } catch (const Error& e) {
      throw parse_error(e.what());
    }
    offset += line.size() + 1;
  }
  if (in.peek() != std::char_traits<char>::eof()) throw parse_error("trailing data");
  return corpus;
}

void save_corpus_file(const StatuteCorpus& corpus, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kIo, "cannot write '" + path + "'");
  save_corpus(corpus, out);
  if (!out) throw Error(ErrorKind::kIo, "write failed for '" + path + "'");
}

StatuteCorpus load_corpus_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open corpus snapshot '" + path + "'");
  return load_corpus(in);
}

}  // namespace lexfuse
