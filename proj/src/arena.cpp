#include "lexfuse/arena.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>
#include <unordered_set>

#include "json.hpp"
#include "lexfuse/error.hpp"
#include "lexfuse/text.hpp"

namespace lexfuse::arena {
namespace {

using nlohmann::json;

constexpr std::string_view kLabels = "ABCD";

int label_bit(char label) {
  const auto pos = kLabels.find(label);
  return pos == std::string_view::npos ? -1 : static_cast<int>(pos);
}

Error invalid(const std::string& message) { return Error(ErrorKind::kInvalidInput, message); }

Choices choices_from_json(const json& j, const std::string& where) {
  if (!j.is_array()) throw invalid(where + ": labels must be an array of strings");
  std::vector<std::string> labels;
  for (const auto& item : j) {
    if (!item.is_string()) throw invalid(where + ": labels must be an array of strings");
    labels.push_back(item.get<std::string>());
  }
  try {
    return Choices::from_labels(labels);
  } catch (const Error& e) {
    throw invalid(where + ": " + e.what());
  }
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    out.emplace_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::vector<std::string_view> lines_of(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!line.empty()) out.push_back(line);
    start = end + 1;
  }
  return out;
}

double parse_double(const std::string& s, const std::string& where) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw Error(ErrorKind::kParse, where + ": bad number '" + s + "'");
  }
  if (used != s.size()) throw Error(ErrorKind::kParse, where + ": bad number '" + s + "'");
  return v;
}

}  // namespace

// --- choices / questions ---------------------------------------------------

Choices Choices::from_labels(std::span<const std::string> labels) {
  Choices c;
  for (const auto& label : labels) {
    if (label.size() != 1 || label_bit(label[0]) < 0) throw invalid("unknown option label '" + label + "'");
    c.insert(label[0]);
  }
  return c;
}

Choices Choices::from_string(std::string_view letters) {
  Choices c;
  for (char ch : letters) {
    if (label_bit(ch) < 0) throw invalid(std::string("unknown option label '") + ch + "'");
    c.insert(ch);
  }
  return c;
}

bool Choices::contains(char label) const {
  const int bit = label_bit(label);
  return bit >= 0 && (bits_ >> bit) & 1;
}

void Choices::insert(char label) {
  const int bit = label_bit(label);
  if (bit < 0) throw invalid(std::string("unknown option label '") + label + "'");
  bits_ |= static_cast<std::uint8_t>(1u << bit);
}

std::vector<std::string> Choices::labels() const {
  std::vector<std::string> out;
  for (char ch : kLabels) {
    if (contains(ch)) out.emplace_back(1, ch);
  }
  return out;
}

std::string Choices::str() const {
  std::string out;
  for (char ch : kLabels) {
    if (contains(ch)) out += ch;
  }
  return out;
}

Choices ExamQuestion::option_labels() const {
  Choices c;
  for (const auto& [label, _] : options) c.insert(label);
  return c;
}

void ExamQuestion::validate() const {
  if (id.empty()) throw invalid("question id must be non-empty");
  if (options.empty()) throw invalid("question '" + id + "': no options");
  for (const auto& [label, _] : options) {
    if (label_bit(label) < 0) throw invalid("question '" + id + "': unknown option label '" + std::string(1, label) + "'");
  }
  if (gold.empty()) throw invalid("question '" + id + "': gold answer set is empty");
  if (!gold.subset_of(option_labels())) {
    throw invalid("question '" + id + "': gold {" + gold.str() + "} is not a subset of options {" +
                  option_labels().str() + "}");
  }
}

Exam::Exam(std::vector<ExamQuestion> questions) {
  for (auto& q : questions) add(std::move(q));
}

void Exam::add(ExamQuestion question) {
  question.validate();
  if (index_.contains(question.id)) throw invalid("duplicate question id '" + question.id + "'");
  index_.emplace(question.id, questions_.size());
  questions_.push_back(std::move(question));
}

const ExamQuestion* Exam::find(std::string_view id) const {
  auto it = index_.find(std::string(id));
  return it == index_.end() ? nullptr : &questions_[it->second];
}

// --- files -------------------------------------------------------------------

Exam load_exam(std::istream& in) {
  Exam exam;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::is_blank(line)) continue;
    const std::string where = "exam line " + std::to_string(line_no);
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw Error(ErrorKind::kParse, where + ": " + e.what());
    }
    if (!j.is_object()) throw invalid(where + ": expected an object");
    ExamQuestion q;
    if (!j.contains("id") || !j["id"].is_string()) throw invalid(where + ": missing string 'id'");
    q.id = j["id"].get<std::string>();
    const std::string qwhere = where + " (question '" + q.id + "')";
    q.stem = j.value("stem", "");
    if (!j.contains("options") || !j["options"].is_object()) throw invalid(qwhere + ": 'options' must be an object");
    for (const auto& [label, option_text] : j["options"].items()) {
      if (label.size() != 1 || label_bit(label[0]) < 0) throw invalid(qwhere + ": unknown option label '" + label + "'");
      if (!option_text.is_string()) throw invalid(qwhere + ": option text must be a string");
      q.options.emplace(label[0], option_text.get<std::string>());
    }
    if (!j.contains("gold")) throw invalid(qwhere + ": missing 'gold'");
    q.gold = choices_from_json(j["gold"], qwhere + " gold");
    try {
      exam.add(std::move(q));
    } catch (const Error& e) {
      throw invalid(where + ": " + e.what());
    }
  }
  return exam;
}

Exam load_exam_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open exam file '" + path + "'");
  return load_exam(in);
}

void save_exam(const Exam& exam, std::ostream& out) {
  for (const auto& q : exam.questions()) {
    json options = json::object();
    for (const auto& [label, option_text] : q.options) options[std::string(1, label)] = option_text;
    json j = {{"id", q.id}, {"stem", q.stem}, {"options", options}, {"gold", q.gold.labels()}};
    out << j.dump() << '\n';
  }
}

AnswerSheet load_sheet(std::istream& in) {
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kParse, std::string("answer sheet: ") + e.what());
  }
  if (!j.is_object() || !j.contains("model") || !j["model"].is_string()) {
    throw invalid("answer sheet: missing string 'model'");
  }
  AnswerSheet sheet;
  sheet.model_name = j["model"].get<std::string>();
  if (sheet.model_name.empty()) throw invalid("answer sheet: empty model name");
  if (!j.contains("answers") || !j["answers"].is_object()) {
    throw invalid("answer sheet '" + sheet.model_name + "': 'answers' must be an object");
  }
  for (const auto& [qid, labels] : j["answers"].items()) {
    sheet.answers.emplace(qid, choices_from_json(labels, "answer sheet '" + sheet.model_name + "' question '" + qid + "'"));
  }
  return sheet;
}

AnswerSheet load_sheet(std::istream& in, const Exam& exam) {
  AnswerSheet sheet = load_sheet(in);
  validate_sheet(sheet, exam);
  return sheet;
}

AnswerSheet load_sheet_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open answer sheet '" + path + "'");
  return load_sheet(in);
}

void save_sheet(const AnswerSheet& sheet, std::ostream& out) {
  json answers = json::object();
  for (const auto& [qid, choice] : sheet.answers) answers[qid] = choice.labels();
  out << json{{"model", sheet.model_name}, {"answers", answers}}.dump() << '\n';
}

void validate_sheet(const AnswerSheet& sheet, const Exam& exam) {
  for (const auto& [qid, _] : sheet.answers) {
    if (exam.find(qid) == nullptr) {
      throw invalid("answer sheet '" + sheet.model_name + "' answers unknown question id '" + qid + "'");
    }
  }
}

// --- grading and battles ---------------------------------------------------

bool is_correct(const ExamQuestion& question, const std::optional<Choices>& answer) {
  return answer.has_value() && *answer == question.gold;
}

namespace {
std::optional<Choices> answer_for(const AnswerSheet& sheet, const std::string& qid) {
  auto it = sheet.answers.find(qid);
  if (it == sheet.answers.end()) return std::nullopt;
  return it->second;
}
}  // namespace

GradeReport grade(const AnswerSheet& sheet, const Exam& exam) {
  validate_sheet(sheet, exam);
  GradeReport report;
  report.model_name = sheet.model_name;
  report.total = exam.size();
  for (const auto& q : exam.questions()) {
    const bool ok = is_correct(q, answer_for(sheet, q.id));
    report.per_question.push_back(ok);
    report.correct += ok ? 1 : 0;
  }
  report.accuracy = report.total == 0 ? 0.0 : static_cast<double>(report.correct) / static_cast<double>(report.total);
  return report;
}

double battle_score(const ExamQuestion& question, const std::optional<Choices>& answer_a,
                    const std::optional<Choices>& answer_b) {
  const bool a = is_correct(question, answer_a);
  const bool b = is_correct(question, answer_b);
  if (a && !b) return 1.0;
  if (b && !a) return 0.0;
  return 0.5;
}

BattleOutcome battle(const ExamQuestion& question, const AnswerSheet& a, const AnswerSheet& b) {
  return {question.id, a.model_name, b.model_name,
          battle_score(question, answer_for(a, question.id), answer_for(b, question.id))};
}

// --- Elo -----------------------------------------------------------------------

// The weaker side is evaluated directly and the stronger side as its
// complement, so expected_score(a, b) + expected_score(b, a) == 1 exactly.
double expected_score(double rating_a, double rating_b) {
  if (rating_a > rating_b) return 1.0 - expected_score(rating_b, rating_a);
  return 1.0 / (1.0 + std::pow(10.0, (rating_b - rating_a) / 400.0));
}

std::pair<double, double> elo_update(double rating_a, double rating_b, double score_a, double k_factor) {
  if (!std::isfinite(rating_a) || !std::isfinite(rating_b) || !std::isfinite(score_a) || !std::isfinite(k_factor)) {
    throw invalid("elo_update: non-finite input");
  }
  if (score_a < 0.0 || score_a > 1.0) throw invalid("elo_update: score must lie in [0, 1]");
  const double delta = k_factor * (score_a - expected_score(rating_a, rating_b));
  return {rating_a + delta, rating_b - delta};
}

// --- win-rate matrix ---------------------------------------------------------

WinRateMatrix::WinRateMatrix(std::vector<std::string> models)
    : models_(std::move(models)), cells_(models_.size() * models_.size()) {}

void WinRateMatrix::record(std::size_t a, std::size_t b, double score_a) {
  if (a == b || a >= models_.size() || b >= models_.size()) throw invalid("win-rate matrix: bad model pair");
  PairRecord& ab = cells_[a * models_.size() + b];
  PairRecord& ba = cells_[b * models_.size() + a];
  if (score_a == 1.0) {
    ++ab.wins;
    ++ba.losses;
  } else if (score_a == 0.0) {
    ++ab.losses;
    ++ba.wins;
  } else if (score_a == 0.5) {
    ++ab.draws;
    ++ba.draws;
  } else {
    throw invalid("win-rate matrix: battle score must be 0, 0.5 or 1");
  }
}

void WinRateMatrix::set_pair(std::size_t a, std::size_t b, PairRecord record) {
  if (a == b || a >= models_.size() || b >= models_.size()) throw invalid("win-rate matrix: bad model pair");
  const PairRecord mirrored{record.losses, record.draws, record.wins};
  PairRecord& ab = cells_[a * models_.size() + b];
  PairRecord& ba = cells_[b * models_.size() + a];
  if ((ab.battles() > 0 && ab != record) || (ba.battles() > 0 && ba != mirrored)) {
    throw Error(ErrorKind::kParse, "win-rate matrix: inconsistent records for " + models_[a] + " vs " + models_[b]);
  }
  ab = record;
  ba = mirrored;
}

double WinRateMatrix::win_pct(std::size_t i, std::size_t j) const {
  const auto& c = at(i, j);
  return c.battles() == 0 ? 0.0 : 100.0 * static_cast<double>(c.wins) / static_cast<double>(c.battles());
}

double WinRateMatrix::draw_pct(std::size_t i, std::size_t j) const {
  const auto& c = at(i, j);
  return c.battles() == 0 ? 0.0 : 100.0 * static_cast<double>(c.draws) / static_cast<double>(c.battles());
}

double WinRateMatrix::loss_pct(std::size_t i, std::size_t j) const {
  const auto& c = at(i, j);
  return c.battles() == 0 ? 0.0 : 100.0 * static_cast<double>(c.losses) / static_cast<double>(c.battles());
}

std::optional<std::size_t> WinRateMatrix::index_of(std::string_view model) const {
  for (std::size_t i = 0; i < models_.size(); ++i) {
    if (models_[i] == model) return i;
  }
  return std::nullopt;
}

// --- tournament ----------------------------------------------------------------

TournamentResult run_tournament(std::span<const AnswerSheet> sheets, const Exam& exam, std::uint64_t schedule_seed,
                                double k_factor) {
  if (sheets.size() < 2) throw invalid("arena needs at least 2 answer sheets, got " + std::to_string(sheets.size()));
  if (!std::isfinite(k_factor) || k_factor <= 0.0) throw invalid("arena K-factor must be positive");
  std::vector<std::string> models;
  std::unordered_set<std::string> seen;
  for (const auto& sheet : sheets) {
    validate_sheet(sheet, exam);
    if (!seen.insert(sheet.model_name).second) throw invalid("duplicate model name '" + sheet.model_name + "'");
    if (sheet.model_name.find_first_of(",\t\n\r") != std::string::npos) {
      throw invalid("model name '" + sheet.model_name + "' contains a comma, tab or newline");
    }
    models.push_back(sheet.model_name);
  }

  struct Match {
    std::uint32_t a;
    std::uint32_t b;
    std::uint32_t question;
  };
  std::vector<Match> schedule;
  schedule.reserve(sheets.size() * (sheets.size() - 1) / 2 * exam.size());
  for (std::uint32_t a = 0; a < sheets.size(); ++a) {
    for (std::uint32_t b = a + 1; b < sheets.size(); ++b) {
      for (std::uint32_t q = 0; q < exam.size(); ++q) schedule.push_back({a, b, q});
    }
  }
  std::mt19937_64 rng(schedule_seed);
  seeded_shuffle(schedule, rng);

  TournamentResult result;
  result.matrix = WinRateMatrix(models);
  for (const auto& name : models) result.ratings.push_back({name, kInitialRating, 0});
  result.log.reserve(schedule.size());

  for (std::size_t seq = 0; seq < schedule.size(); ++seq) {
    const Match& m = schedule[seq];
    BattleOutcome outcome = battle(exam.questions()[m.question], sheets[m.a], sheets[m.b]);
    auto& ra = result.ratings[m.a];
    auto& rb = result.ratings[m.b];
    std::tie(ra.rating, rb.rating) = elo_update(ra.rating, rb.rating, outcome.score_a, k_factor);
    ++ra.games_played;
    ++rb.games_played;
    result.matrix.record(m.a, m.b, outcome.score_a);
    result.log.push_back({seq + 1, std::move(outcome), ra.rating, rb.rating});
  }
  return result;
}

// --- export ----------------------------------------------------------------

std::string export_matrix_csv(const WinRateMatrix& matrix) {
  const auto& models = matrix.models();
  std::string out = "model";
  for (const auto& m : models) out += "," + m;
  out += '\n';
  for (std::size_t i = 0; i < models.size(); ++i) {
    out += models[i];
    for (std::size_t j = 0; j < models.size(); ++j) {
      out += ',';
      if (!matrix.played(i, j)) {
        out += '-';
      } else {
        out += fmt::format("{:.1f}/{:.1f}/{:.1f}", matrix.win_pct(i, j), matrix.draw_pct(i, j), matrix.loss_pct(i, j));
      }
    }
    out += '\n';
  }
  return out;
}

std::vector<std::vector<std::optional<PercentCell>>> parse_matrix_csv(std::string_view csv,
                                                                      std::vector<std::string>* models_out) {
  const auto lines = lines_of(csv);
  if (lines.empty()) throw Error(ErrorKind::kParse, "win-rate csv: empty");
  const auto header = split(lines[0], ',');
  if (header.empty() || header[0] != "model") throw Error(ErrorKind::kParse, "win-rate csv: bad header");
  const std::vector<std::string> models(header.begin() + 1, header.end());
  if (lines.size() != models.size() + 1) throw Error(ErrorKind::kParse, "win-rate csv: row count does not match header");
  std::vector<std::vector<std::optional<PercentCell>>> grid(models.size());
  for (std::size_t i = 0; i < models.size(); ++i) {
    const std::string where = "win-rate csv row " + std::to_string(i + 1);
    const auto cells = split(lines[i + 1], ',');
    if (cells.size() != models.size() + 1 || cells[0] != models[i]) throw Error(ErrorKind::kParse, where + ": malformed");
    for (std::size_t j = 0; j < models.size(); ++j) {
      const auto& cell = cells[j + 1];
      if (cell == "-") {
        grid[i].emplace_back(std::nullopt);
        continue;
      }
      const auto parts = split(cell, '/');
      if (parts.size() != 3) throw Error(ErrorKind::kParse, where + ": bad cell '" + cell + "'");
      grid[i].emplace_back(PercentCell{parse_double(parts[0], where), parse_double(parts[1], where),
                                       parse_double(parts[2], where)});
    }
  }
  if (models_out != nullptr) *models_out = models;
  return grid;
}

std::string export_matrix_records(const WinRateMatrix& matrix) {
  std::string out;
  const auto& models = matrix.models();
  for (std::size_t i = 0; i < models.size(); ++i) {
    for (std::size_t j = 0; j < models.size(); ++j) {
      if (!matrix.played(i, j)) continue;
      const auto& c = matrix.at(i, j);
      json rec = {{"model_a", models[i]},          {"model_b", models[j]},           {"battles", c.battles()},
                  {"wins", c.wins},                {"draws", c.draws},               {"losses", c.losses},
                  {"win_pct", matrix.win_pct(i, j)}, {"draw_pct", matrix.draw_pct(i, j)}, {"loss_pct", matrix.loss_pct(i, j)}};
      out += rec.dump() + '\n';
    }
  }
  return out;
}

WinRateMatrix parse_matrix_records(std::string_view text, std::vector<std::string> models) {
  WinRateMatrix matrix(std::move(models));
  std::size_t n = 0;
  for (auto line : lines_of(text)) {
    ++n;
    const std::string where = "win-rate record " + std::to_string(n);
    try {
      const auto j = json::parse(line);
      const auto a = matrix.index_of(j.at("model_a").get<std::string>());
      const auto b = matrix.index_of(j.at("model_b").get<std::string>());
      if (!a || !b) throw Error(ErrorKind::kParse, where + ": unknown model");
      matrix.set_pair(*a, *b, {j.at("wins").get<std::size_t>(), j.at("draws").get<std::size_t>(),
                               j.at("losses").get<std::size_t>()});
    } catch (const json::exception& e) {
      throw Error(ErrorKind::kParse, where + ": " + e.what());
    }
  }
  return matrix;
}

std::string export_ratings(std::span<const EloRating> ratings) {
  std::vector<std::size_t> order(ratings.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return ratings[a].rating > ratings[b].rating; });
  std::size_t width = 5;
  for (const auto& r : ratings) width = std::max(width, r.model_name.size());
  std::string out = fmt::format("{:<4}  {:<{}}  {:>9}  {:>6}\n", "rank", "model", width, "rating", "games");
  for (std::size_t r = 0; r < order.size(); ++r) {
    const auto& e = ratings[order[r]];
    out += fmt::format("{:<4}  {:<{}}  {:>9.1f}  {:>6}\n", r + 1, e.model_name, width, e.rating, e.games_played);
  }
  return out;
}

std::string export_ratings_records(std::span<const EloRating> ratings) {
  std::string out;
  for (const auto& r : ratings) {
    out += json{{"model", r.model_name}, {"rating", r.rating}, {"games", r.games_played}}.dump() + '\n';
  }
  return out;
}

std::vector<EloRating> parse_ratings_records(std::string_view text) {
  std::vector<EloRating> out;
  for (auto line : lines_of(text)) {
    try {
      const auto j = json::parse(line);
      out.push_back({j.at("model").get<std::string>(), j.at("rating").get<double>(), j.at("games").get<std::size_t>()});
    } catch (const json::exception& e) {
      throw Error(ErrorKind::kParse, std::string("ratings record: ") + e.what());
    }
  }
  return out;
}

std::string export_battle_log(std::span<const BattleRecord> log) {
  std::string out = "seq\tquestion\tmodel_a\tmodel_b\tscore_a\trating_a\trating_b\n";
  for (const auto& b : log) {
    out += fmt::format("{}\t{}\t{}\t{}\t{}\t{}\t{}\n", b.seq, b.outcome.question_id, b.outcome.model_a,
                       b.outcome.model_b, b.outcome.score_a, b.rating_a_after, b.rating_b_after);
  }
  return out;
}

std::vector<BattleRecord> parse_battle_log(std::string_view text) {
  std::vector<BattleRecord> out;
  const auto lines = lines_of(text);
  for (std::size_t n = 1; n < lines.size(); ++n) {
    const std::string where = "battle log line " + std::to_string(n + 1);
    const auto f = split(lines[n], '\t');
    if (f.size() != 7) throw Error(ErrorKind::kParse, where + ": expected 7 fields");
    BattleRecord rec;
    rec.seq = static_cast<std::size_t>(parse_double(f[0], where));
    rec.outcome = {f[1], f[2], f[3], parse_double(f[4], where)};
    rec.rating_a_after = parse_double(f[5], where);
    rec.rating_b_after = parse_double(f[6], where);
    out.push_back(std::move(rec));
  }
  return out;
}

}  // namespace lexfuse::arena
