#include "lexfuse/index_io.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include "json.hpp"
#include "lexfuse/error.hpp"
#include "lexfuse/hash.hpp"

namespace lexfuse {
namespace {

static_assert(std::endian::native == std::endian::little, "index snapshots assume a little-endian host");

constexpr std::array<char, 8> kMagic = {'L', 'X', 'F', 'I', 'N', 'D', 'E', 'X'};
constexpr std::uint32_t kVersion = 1;
constexpr std::size_t kHeaderSize = 40;

class Writer {
 public:
  template <typename T>
  void put(T value) {
    char bytes[sizeof(T)];
    std::memcpy(bytes, &value, sizeof(T));
    buf_.append(bytes, sizeof(T));
  }
  void put_bytes(std::string_view bytes) { buf_.append(bytes); }
  void put_blob(std::string_view bytes) {
    put<std::uint64_t>(bytes.size());
    put_bytes(bytes);
  }
  const std::string& bytes() const { return buf_; }

 private:
  std::string buf_;
};

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  template <typename T>
  T get(const char* what) {
    need(sizeof(T), what);
    T value;
    std::memcpy(&value, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return value;
  }
  std::string_view get_bytes(std::uint64_t n, const char* what) {
    need(n, what);
    auto out = bytes_.substr(pos_, n);
    pos_ += n;
    return out;
  }
  std::string_view get_blob(const char* what) { return get_bytes(get<std::uint64_t>(what), what); }
  std::size_t pos() const { return pos_; }
  std::size_t remaining() const { return bytes_.size() - pos_; }

  Error error(const std::string& what) const {
    return Error(ErrorKind::kParse, "index snapshot: " + what + " at byte offset " + std::to_string(pos_));
  }

 private:
  void need(std::uint64_t n, const char* what) const {
    if (n > remaining()) throw error(std::string("truncated while reading ") + what);
  }

  std::string_view bytes_;
  std::size_t pos_ = 0;
};

std::uint64_t checksum(std::string_view bytes) { return mix64(fnv1a64(bytes)); }

std::string embedder_to_json(const EmbedderConfig& cfg) {
  nlohmann::json j = {{"kind", to_string(cfg.kind)},
                      {"dim", cfg.dim},
                      {"seed", cfg.seed},
                      {"endpoint", cfg.endpoint},
                      {"sidecar_path", cfg.sidecar_path}};
  return j.dump();
}

EmbedderConfig embedder_from_json(std::string_view text) {
  const auto j = nlohmann::json::parse(text);
  EmbedderConfig cfg;
  cfg.kind = embedder_kind_from_string(j.at("kind").get<std::string>());
  cfg.dim = j.at("dim").get<std::size_t>();
  cfg.seed = j.at("seed").get<std::uint64_t>();
  cfg.endpoint = j.value("endpoint", "");
  cfg.sidecar_path = j.value("sidecar_path", "");
  return cfg;
}

}  // namespace

void save_index(const IndexSnapshot& snapshot, std::ostream& out) {
  const LawMatrix& m = snapshot.matrix;
  Writer w;
  w.put_bytes(std::string_view(kMagic.data(), kMagic.size()));
  w.put<std::uint32_t>(kVersion);
  w.put<std::uint32_t>(0);
  w.put<std::uint64_t>(m.dim());
  w.put<std::uint64_t>(m.rows());
  w.put<std::uint64_t>(m.corpus_fingerprint());
  for (double v : m.values()) w.put(v);
  for (double v : m.norms()) w.put(v);
  w.put_blob(snapshot.embedder ? embedder_to_json(*snapshot.embedder) : std::string());
  if (snapshot.corpus) {
    std::ostringstream corpus_bytes;
    save_corpus(*snapshot.corpus, corpus_bytes);
    w.put_blob(corpus_bytes.str());
  } else {
    w.put_blob({});
  }
  const std::uint64_t sum = checksum(w.bytes());
  w.put(sum);
  out.write(w.bytes().data(), static_cast<std::streamsize>(w.bytes().size()));
}

void save_index(const LawMatrix& matrix, std::ostream& out) { save_index(IndexSnapshot{matrix, {}, {}}, out); }

IndexSnapshot load_index(std::istream& in) {
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  Reader r(bytes);

  const auto magic = r.get_bytes(kMagic.size(), "magic");
  if (magic != std::string_view(kMagic.data(), kMagic.size())) throw Error(ErrorKind::kParse, "index snapshot: bad magic at byte offset 0");
  const auto version = r.get<std::uint32_t>("version");
  if (version != kVersion) throw r.error("unsupported version " + std::to_string(version));
  r.get<std::uint32_t>("reserved");
  const auto dim = r.get<std::uint64_t>("dim");
  const auto rows = r.get<std::uint64_t>("rows");
  const auto fingerprint = r.get<std::uint64_t>("corpus fingerprint");
  if (dim == 0) throw r.error("dim is zero");
  // Reject sizes that cannot fit before allocating anything.
  const std::uint64_t doubles_left = r.remaining() / sizeof(double);
  if (rows > doubles_left || dim > doubles_left || rows * dim > doubles_left) throw r.error("truncated matrix data");

  std::vector<double> values(rows * dim);
  for (auto& v : values) v = r.get<double>("matrix values");
  std::vector<double> norms(rows);
  for (auto& v : norms) v = r.get<double>("row norms");

  const auto meta = r.get_blob("embedder config");
  const auto corpus_bytes = r.get_blob("corpus snapshot");
  const std::size_t payload_end = r.pos();
  const auto stored_sum = r.get<std::uint64_t>("checksum");
  if (r.remaining() != 0) throw r.error("trailing data");
  if (stored_sum != checksum(std::string_view(bytes).substr(0, payload_end))) {
    throw Error(ErrorKind::kParse, "index snapshot: checksum mismatch at byte offset " + std::to_string(payload_end));
  }

  IndexSnapshot snap;
  try {
    snap.matrix = LawMatrix(dim, std::move(values), std::move(norms), fingerprint);
  } catch (const Error& e) {
    throw Error(ErrorKind::kParse, std::string("index snapshot: ") + e.what());
  }
  if (!meta.empty()) {
    try {
      snap.embedder = embedder_from_json(meta);
    } catch (const std::exception& e) {
      throw Error(ErrorKind::kParse, std::string("index snapshot: bad embedder config: ") + e.what());
    }
  }
  if (!corpus_bytes.empty()) {
    std::istringstream cs{std::string(corpus_bytes)};
    snap.corpus = load_corpus(cs);
    check_index_matches(snap.matrix, *snap.corpus);
  }
  return snap;
}

IndexSnapshot load_index(std::istream& in, const StatuteCorpus& corpus) {
  IndexSnapshot snap = load_index(in);
  check_index_matches(snap.matrix, corpus);
  snap.corpus = corpus;
  return snap;
}

void check_index_matches(const LawMatrix& matrix, const StatuteCorpus& corpus) {
  if (matrix.corpus_fingerprint() != corpus.fingerprint() || matrix.rows() != corpus.size()) {
    throw Error(ErrorKind::kStaleIndex, "stale index: built from corpus " + hex64(matrix.corpus_fingerprint()) +
                                            " (" + std::to_string(matrix.rows()) + " rows), current corpus is " +
                                            hex64(corpus.fingerprint()) + " (" + std::to_string(corpus.size()) +
                                            " records)");
  }
}

void save_index_file(const IndexSnapshot& snapshot, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kIo, "cannot write '" + path + "'");
  save_index(snapshot, out);
  if (!out) throw Error(ErrorKind::kIo, "write failed for '" + path + "'");
}

IndexSnapshot load_index_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open index '" + path + "'");
  return load_index(in);
}

}  // namespace lexfuse
