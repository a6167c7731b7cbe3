#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

// Multiple-choice exam grading and the pairwise Elo arena.
namespace lexfuse::arena {

// A subset of the option labels A..D.
class Choices {
 public:
  Choices() = default;
  // Throws Error(kInvalidInput) for labels other than A, B, C, D.
  static Choices from_labels(std::span<const std::string> labels);
  static Choices from_string(std::string_view letters);  // e.g. "CD"

  bool contains(char label) const;
  void insert(char label);
  bool empty() const { return bits_ == 0; }
  bool subset_of(Choices other) const { return (bits_ & ~other.bits_) == 0; }
  std::vector<std::string> labels() const;
  std::string str() const;  // "CD"; empty set is ""

  friend bool operator==(Choices, Choices) = default;

 private:
  std::uint8_t bits_ = 0;
};

struct ExamQuestion {
  std::string id;
  std::string stem;
  std::map<char, std::string> options;
  Choices gold;

  // Throws Error(kInvalidInput) naming the question id.
  void validate() const;
  Choices option_labels() const;

  friend bool operator==(const ExamQuestion&, const ExamQuestion&) = default;
};

class Exam {
 public:
  Exam() = default;
  explicit Exam(std::vector<ExamQuestion> questions);

  void add(ExamQuestion question);
  const std::vector<ExamQuestion>& questions() const { return questions_; }
  std::size_t size() const { return questions_.size(); }
  const ExamQuestion* find(std::string_view id) const;

  friend bool operator==(const Exam& a, const Exam& b) { return a.questions_ == b.questions_; }

 private:
  std::vector<ExamQuestion> questions_;
  std::unordered_map<std::string, std::size_t> index_;
};

struct AnswerSheet {
  std::string model_name;
  std::map<std::string, Choices> answers;  // empty set = abstention

  friend bool operator==(const AnswerSheet&, const AnswerSheet&) = default;
};

// Line-delimited {"id","stem","options":{"A":...},"gold":["C","D"]}.
Exam load_exam(std::istream& in);
Exam load_exam_file(const std::string& path);
void save_exam(const Exam& exam, std::ostream& out);

// {"model": string, "answers": {"qid": ["A", ...], ...}}
AnswerSheet load_sheet(std::istream& in);
AnswerSheet load_sheet(std::istream& in, const Exam& exam);
AnswerSheet load_sheet_file(const std::string& path);
void save_sheet(const AnswerSheet& sheet, std::ostream& out);
// Throws Error(kInvalidInput) when the sheet answers a question not in the exam.
void validate_sheet(const AnswerSheet& sheet, const Exam& exam);

// Multi-select exact match: correct iff the answer equals the gold set.
bool is_correct(const ExamQuestion& question, const std::optional<Choices>& answer);

struct GradeReport {
  std::string model_name;
  std::size_t correct = 0;
  std::size_t total = 0;
  double accuracy = 0.0;
  std::vector<bool> per_question;  // exam order
};

// Unanswered questions count as incorrect.
GradeReport grade(const AnswerSheet& sheet, const Exam& exam);

struct BattleOutcome {
  std::string question_id;
  std::string model_a;
  std::string model_b;
  double score_a = 0.5;  // 1 win, 0.5 draw, 0 loss

  friend bool operator==(const BattleOutcome&, const BattleOutcome&) = default;
};

// A wins iff A is correct and B is not, B wins symmetrically, else draw.
double battle_score(const ExamQuestion& question, const std::optional<Choices>& answer_a,
                    const std::optional<Choices>& answer_b);
BattleOutcome battle(const ExamQuestion& question, const AnswerSheet& a, const AnswerSheet& b);

inline constexpr double kInitialRating = 1500.0;
inline constexpr double kDefaultKFactor = 32.0;

struct EloRating {
  std::string model_name;
  double rating = kInitialRating;
  std::size_t games_played = 0;

  friend bool operator==(const EloRating&, const EloRating&) = default;
};

// 1 / (1 + 10^((rating_b - rating_a) / 400)).
double expected_score(double rating_a, double rating_b);

// Standard Elo update. B's change is the exact negation of A's, so the pair
// sum is conserved. Throws Error(kInvalidInput) on non-finite input or a
// score outside [0, 1].
std::pair<double, double> elo_update(double rating_a, double rating_b, double score_a, double k_factor);

struct PairRecord {
  std::size_t wins = 0;
  std::size_t draws = 0;
  std::size_t losses = 0;

  std::size_t battles() const { return wins + draws + losses; }
  friend bool operator==(const PairRecord&, const PairRecord&) = default;
};

// Win/draw/loss tallies between every ordered model pair, from the row
// model's perspective.
class WinRateMatrix {
 public:
  WinRateMatrix() = default;
  explicit WinRateMatrix(std::vector<std::string> models);

  void record(std::size_t a, std::size_t b, double score_a);
  // Throws if the pair is not consistent with what is already stored.
  void set_pair(std::size_t a, std::size_t b, PairRecord record);

  const std::vector<std::string>& models() const { return models_; }
  const PairRecord& at(std::size_t i, std::size_t j) const { return cells_[i * models_.size() + j]; }
  bool played(std::size_t i, std::size_t j) const { return at(i, j).battles() > 0; }

  // Percentages over battles between i and j; 0 when unplayed.
  double win_pct(std::size_t i, std::size_t j) const;
  double draw_pct(std::size_t i, std::size_t j) const;
  double loss_pct(std::size_t i, std::size_t j) const;

  std::optional<std::size_t> index_of(std::string_view model) const;

  friend bool operator==(const WinRateMatrix&, const WinRateMatrix&) = default;

 private:
  std::vector<std::string> models_;
  std::vector<PairRecord> cells_;
};

struct BattleRecord {
  std::size_t seq = 0;
  BattleOutcome outcome;
  double rating_a_after = 0.0;
  double rating_b_after = 0.0;

  friend bool operator==(const BattleRecord&, const BattleRecord&) = default;
};

struct TournamentResult {
  std::vector<EloRating> ratings;  // sheet order
  WinRateMatrix matrix;
  std::vector<BattleRecord> log;
};

// Every unordered model pair meets on every exam question. The battle list
// (pairs in sheet order, questions in exam order) is permuted by a
// Fisher-Yates shuffle driven by mt19937_64(seed), then replayed through Elo
// sequentially. Bitwise reproducible for equal inputs. Throws
// Error(kInvalidInput) with fewer than two sheets or duplicate model names.
TournamentResult run_tournament(std::span<const AnswerSheet> sheets, const Exam& exam, std::uint64_t schedule_seed,
                                double k_factor = kDefaultKFactor);

// Uniform integer in [0, bound) from a 64-bit engine by rejection. Unlike
// std::uniform_int_distribution the result is the same on every standard
// library, which keeps schedules replayable.
template <typename Engine>
std::uint64_t bounded_draw(Engine& rng, std::uint64_t bound) {
  const std::uint64_t threshold = (std::uint64_t{0} - bound) % bound;  // 2^64 mod bound
  for (;;) {
    const std::uint64_t x = rng();
    if (x >= threshold) return x % bound;
  }
}

// Fisher-Yates over `items` using bounded_draw.
template <typename T, typename Engine>
void seeded_shuffle(std::vector<T>& items, Engine& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(bounded_draw(rng, i));
    std::swap(items[i - 1], items[j]);
  }
}

// --- export ------------------------------------------------------------------

// Grid with one row and one column per model, model list order. Cells are
// "win/draw/loss" percentages with one decimal, "-" when the pair never met.
std::string export_matrix_csv(const WinRateMatrix& matrix);
// Parses export_matrix_csv output back into percentage triples.
struct PercentCell {
  double win = 0.0;
  double draw = 0.0;
  double loss = 0.0;
};
std::vector<std::vector<std::optional<PercentCell>>> parse_matrix_csv(std::string_view csv,
                                                                      std::vector<std::string>* models = nullptr);

// One JSON record per played ordered pair, carrying raw counts.
std::string export_matrix_records(const WinRateMatrix& matrix);
WinRateMatrix parse_matrix_records(std::string_view text, std::vector<std::string> models);

// Human table sorted by rating (ties keep sheet order).
std::string export_ratings(std::span<const EloRating> ratings);
// One JSON record per model, full precision, sheet order.
std::string export_ratings_records(std::span<const EloRating> ratings);
std::vector<EloRating> parse_ratings_records(std::string_view text);

// Tab-separated battle log, one battle per line, ratings at full precision.
std::string export_battle_log(std::span<const BattleRecord> log);
std::vector<BattleRecord> parse_battle_log(std::string_view text);

}  // namespace lexfuse::arena
