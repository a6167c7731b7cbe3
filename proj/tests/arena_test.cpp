#include "lexfuse/arena.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "fixtures.hpp"

namespace lexfuse::arena {
namespace {

using fixtures::expect_error;

ExamQuestion question(std::string id, std::string_view gold) {
  return {std::move(id), "stem", {{'A', "a"}, {'B', "b"}, {'C', "c"}, {'D', "d"}}, Choices::from_string(gold)};
}

Exam exam_of(std::size_t n) {
  Exam exam;
  for (std::size_t i = 0; i < n; ++i) exam.add(question("q" + std::to_string(i), i % 3 == 0 ? "CD" : "A"));
  return exam;
}

AnswerSheet sheet_with(std::string name, const Exam& exam, const std::vector<bool>& correct) {
  AnswerSheet s{std::move(name), {}};
  for (std::size_t i = 0; i < exam.size(); ++i) {
    const auto& q = exam.questions()[i];
    s.answers[q.id] = correct[i] ? q.gold : Choices::from_string("B");
  }
  return s;
}

TEST(Choices, ParseAndPrint) {
  const std::vector<std::string> labels = {"D", "C"};
  EXPECT_EQ(Choices::from_labels(labels).str(), "CD");
  EXPECT_EQ(Choices::from_string("CD"), Choices::from_labels(labels));
  EXPECT_TRUE(Choices::from_string("").empty());
  expect_error([] { Choices::from_string("E"); }, ErrorKind::kInvalidInput, "'E'");
  EXPECT_TRUE(Choices::from_string("C").subset_of(Choices::from_string("CD")));
}

TEST(Exam, BarExamQuestionLoadsWithGoldCD) {
  const auto exam = load_exam_file(fixtures::data_path("exam.jsonl"));
  const auto* q = exam.find("bar-01");
  ASSERT_NE(q, nullptr);
  EXPECT_EQ(q->gold, Choices::from_string("CD"));
  EXPECT_EQ(q->options.size(), 4u);
  EXPECT_EQ(q->options.at('C'), "将市人民检察院列为共同原告");
}

TEST(Exam, RejectsBadQuestions) {
  std::istringstream bad_gold(R"({"id":"q1","stem":"s","options":{"A":"a","B":"b"},"gold":["E"]})");
  expect_error([&] { load_exam(bad_gold); }, ErrorKind::kInvalidInput, "q1");
  std::istringstream outside(R"({"id":"q2","stem":"s","options":{"A":"a","B":"b"},"gold":["C"]})");
  expect_error([&] { load_exam(outside); }, ErrorKind::kInvalidInput, "q2");
  std::istringstream empty_gold(R"({"id":"q3","stem":"s","options":{"A":"a"},"gold":[]})");
  expect_error([&] { load_exam(empty_gold); }, ErrorKind::kInvalidInput, "q3");
  std::istringstream no_options(R"({"id":"q4","stem":"s","options":{},"gold":["A"]})");
  expect_error([&] { load_exam(no_options); }, ErrorKind::kInvalidInput, "q4");
  std::istringstream dup(R"({"id":"q5","options":{"A":"a"},"gold":["A"]})" "\n"
                         R"({"id":"q5","options":{"A":"a"},"gold":["A"]})");
  expect_error([&] { load_exam(dup); }, ErrorKind::kInvalidInput, "q5");
}

TEST(Sheet, UnknownQuestionIsRejected) {
  const auto exam = exam_of(2);
  std::istringstream in(R"({"model":"m","answers":{"q0":["C","D"],"q9":["A"]}})");
  expect_error([&] { load_sheet(in, exam); }, ErrorKind::kInvalidInput, "q9");
  std::istringstream abstain(R"({"model":"m","answers":{"q0":[]}})");
  EXPECT_TRUE(load_sheet(abstain, exam).answers.at("q0").empty());
}

TEST(Files, ExamAndSheetRoundTrip) {
  const auto exam = load_exam_file(fixtures::data_path("exam.jsonl"));
  std::stringstream buf;
  save_exam(exam, buf);
  EXPECT_EQ(load_exam(buf), exam);
  const auto sheet = load_sheet_file(fixtures::data_path("sheets/partial.json"));
  std::stringstream sbuf;
  save_sheet(sheet, sbuf);
  EXPECT_EQ(load_sheet(sbuf), sheet);
}

TEST(Grade, ExactSetMatch) {
  const auto q = question("bar", "CD");
  EXPECT_TRUE(is_correct(q, Choices::from_string("CD")));
  EXPECT_FALSE(is_correct(q, Choices::from_string("C")));
  EXPECT_FALSE(is_correct(q, Choices::from_string("BCD")));
  EXPECT_FALSE(is_correct(q, Choices{}));
  EXPECT_FALSE(is_correct(q, std::nullopt));
}

TEST(Grade, AccuracyCountsUnansweredAsWrong) {
  const auto exam = exam_of(4);
  AnswerSheet s = sheet_with("m", exam, {true, true, true, false});
  EXPECT_DOUBLE_EQ(grade(s, exam).accuracy, 0.75);
  s.answers.erase("q3");
  EXPECT_DOUBLE_EQ(grade(s, exam).accuracy, 0.75);
  s.answers.erase("q2");
  const auto report = grade(s, exam);
  EXPECT_EQ(report.correct, 2u);
  EXPECT_EQ(report.per_question, (std::vector<bool>{true, true, false, false}));
}

TEST(Grade, SampleSheets) {
  const auto exam = load_exam_file(fixtures::data_path("exam.jsonl"));
  EXPECT_DOUBLE_EQ(grade(load_sheet_file(fixtures::data_path("sheets/diligent.json")), exam).accuracy, 1.0);
  EXPECT_DOUBLE_EQ(grade(load_sheet_file(fixtures::data_path("sheets/partial.json")), exam).accuracy, 0.7);
  EXPECT_DOUBLE_EQ(grade(load_sheet_file(fixtures::data_path("sheets/guesser.json")), exam).accuracy, 0.2);
}

TEST(Battle, Rule) {
  const auto q = question("q", "CD");
  const auto right = Choices::from_string("CD");
  EXPECT_EQ(battle_score(q, right, Choices::from_string("C")), 1.0);
  EXPECT_EQ(battle_score(q, Choices::from_string("C"), right), 0.0);
  EXPECT_EQ(battle_score(q, right, right), 0.5);
  EXPECT_EQ(battle_score(q, Choices::from_string("A"), Choices::from_string("B")), 0.5);
  EXPECT_EQ(battle_score(q, std::nullopt, std::nullopt), 0.5);
}

TEST(Elo, EvenMatch) {
  EXPECT_EQ(elo_update(1500, 1500, 1.0, 32), std::make_pair(1516.0, 1484.0));
  EXPECT_EQ(elo_update(1500, 1500, 0.5, 32), std::make_pair(1500.0, 1500.0));
  EXPECT_EQ(elo_update(1500, 1500, 0.0, 32), std::make_pair(1484.0, 1516.0));
}

TEST(Elo, FavouriteLoses) {
  // E_a = 1 / (1 + 10^(-225/400)) evaluated independently: 0.785026736998172.
  const auto [a, b] = elo_update(1613, 1388, 0.0, 32);
  EXPECT_NEAR(expected_score(1613, 1388), 0.785026736998172, 1e-15);
  EXPECT_NEAR(a, 1587.8791444160586, 1e-10);
  EXPECT_NEAR(b, 1413.1208555839414, 1e-10);
}

TEST(Elo, ExpectedScoresAreComplementary) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> dist(0.0, 3000.0);
  for (int i = 0; i < 10000; ++i) {
    const double ra = dist(rng);
    const double rb = dist(rng);
    ASSERT_EQ(expected_score(ra, rb) + expected_score(rb, ra), 1.0) << ra << " " << rb;
  }
}

TEST(Elo, Errors) {
  expect_error([] { elo_update(NAN, 1500, 1, 32); }, ErrorKind::kInvalidInput, "non-finite");
  expect_error([] { elo_update(1500, 1500, 1.5, 32); }, ErrorKind::kInvalidInput, "score");
}

TEST(Elo, SumIsConserved) {
  std::mt19937_64 rng(12);
  std::vector<double> ratings(6, kInitialRating);
  for (int i = 0; i < 10000; ++i) {
    const auto a = rng() % 6;
    auto b = rng() % 6;
    if (a == b) b = (b + 1) % 6;
    const double s = static_cast<double>(rng() % 3) / 2.0;
    std::tie(ratings[a], ratings[b]) = elo_update(ratings[a], ratings[b], s, 32);
  }
  double sum = 0.0;
  for (double r : ratings) sum += r;
  EXPECT_NEAR(sum, 6 * kInitialRating, 1e-9);
}

TEST(Tournament, NeedsTwoSheets) {
  const auto exam = exam_of(3);
  const std::vector<AnswerSheet> one = {sheet_with("a", exam, {true, true, true})};
  expect_error([&] { run_tournament(one, exam, 1); }, ErrorKind::kInvalidInput, "at least 2");
  const std::vector<AnswerSheet> dup = {one[0], one[0]};
  expect_error([&] { run_tournament(dup, exam, 1); }, ErrorKind::kInvalidInput, "duplicate");
}

TEST(Tournament, DominantModelRisesMonotonically) {
  const auto exam = exam_of(10);
  const std::vector<AnswerSheet> sheets = {sheet_with("good", exam, std::vector<bool>(10, true)),
                                           sheet_with("bad", exam, std::vector<bool>(10, false))};
  const auto result = run_tournament(sheets, exam, 99, 32);
  ASSERT_EQ(result.log.size(), 10u);
  double prev = kInitialRating;
  for (const auto& rec : result.log) {
    const double good = rec.outcome.model_a == "good" ? rec.rating_a_after : rec.rating_b_after;
    const double bad = rec.outcome.model_a == "good" ? rec.rating_b_after : rec.rating_a_after;
    EXPECT_GT(good, prev);
    EXPECT_NEAR(good + bad, 3000.0, 1e-9);
    prev = good;
  }
  EXPECT_EQ(result.matrix.win_pct(0, 1), 100.0);
  EXPECT_EQ(result.matrix.loss_pct(1, 0), 100.0);
}

TEST(Tournament, IdenticalSheetsStayAt1500) {
  const auto exam = exam_of(5);
  const auto s = sheet_with("x", exam, {true, false, true, false, true});
  auto t = s;
  t.model_name = "y";
  const std::vector<AnswerSheet> sheets = {s, t};
  const auto result = run_tournament(sheets, exam, 3);
  for (const auto& r : result.ratings) EXPECT_EQ(r.rating, 1500.0);
  EXPECT_EQ(result.matrix.draw_pct(0, 1), 100.0);
}

// Independent replay: rebuild the schedule with a plain Fisher-Yates over
// mt19937_64 and apply the textbook Elo formula in order.
std::vector<double> replay(const std::vector<AnswerSheet>& sheets, const Exam& exam, std::uint64_t seed, double k) {
  struct M {
    std::size_t a, b, q;
  };
  std::vector<M> schedule;
  for (std::size_t a = 0; a < sheets.size(); ++a)
    for (std::size_t b = a + 1; b < sheets.size(); ++b)
      for (std::size_t q = 0; q < exam.size(); ++q) schedule.push_back({a, b, q});
  std::mt19937_64 rng(seed);
  for (std::size_t i = schedule.size(); i > 1; --i) {
    const std::uint64_t bound = i;
    const std::uint64_t limit = (~std::uint64_t{0} - bound + 1) % bound;
    std::uint64_t x = rng();
    while (x < limit) x = rng();
    std::swap(schedule[i - 1], schedule[x % bound]);
  }
  std::vector<double> r(sheets.size(), 1500.0);
  for (const auto& m : schedule) {
    const auto& q = exam.questions()[m.q];
    auto ok = [&](const AnswerSheet& s) {
      auto it = s.answers.find(q.id);
      return it != s.answers.end() && it->second == q.gold;
    };
    const bool a = ok(sheets[m.a]);
    const bool b = ok(sheets[m.b]);
    const double s = a == b ? 0.5 : (a ? 1.0 : 0.0);
    const double ea = 1.0 / (1.0 + std::pow(10.0, (r[m.b] - r[m.a]) / 400.0));
    const double delta = k * (s - ea);
    r[m.a] += delta;
    r[m.b] -= delta;
  }
  return r;
}

TEST(Tournament, MatchesReplayOracle) {
  const auto exam = exam_of(12);
  std::mt19937_64 rng(77);
  std::vector<AnswerSheet> sheets;
  for (const char* name : {"m1", "m2", "m3"}) {
    std::vector<bool> correct;
    for (int i = 0; i < 12; ++i) correct.push_back(rng() % 2 == 0);
    sheets.push_back(sheet_with(name, exam, correct));
  }
  for (std::uint64_t seed : {0ULL, 1ULL, 123456789ULL}) {
    const auto result = run_tournament(sheets, exam, seed, 24);
    const auto expected = replay(sheets, exam, seed, 24);
    for (std::size_t i = 0; i < sheets.size(); ++i) EXPECT_NEAR(result.ratings[i].rating, expected[i], 1e-9);
  }
}

TEST(Tournament, ReplayIsBitwiseIdentical) {
  const auto exam = load_exam_file(fixtures::data_path("exam.jsonl"));
  std::vector<AnswerSheet> sheets;
  for (const char* n : {"diligent", "partial", "guesser"}) {
    sheets.push_back(load_sheet_file(fixtures::data_path(std::string("sheets/") + n + ".json")));
  }
  const auto a = run_tournament(sheets, exam, 42);
  const auto b = run_tournament(sheets, exam, 42);
  EXPECT_EQ(a.log, b.log);
  EXPECT_EQ(a.ratings, b.ratings);
  EXPECT_EQ(export_battle_log(a.log), export_battle_log(b.log));
  EXPECT_NE(export_battle_log(run_tournament(sheets, exam, 43).log), export_battle_log(a.log));
}

TEST(Shuffle, BoundedDrawStaysInRange) {
  std::mt19937_64 rng(1);
  for (std::uint64_t bound : {1ULL, 2ULL, 3ULL, 1000ULL, (1ULL << 63) + 5}) {
    for (int i = 0; i < 100; ++i) EXPECT_LT(bounded_draw(rng, bound), bound);
  }
}

TEST(Matrix, ConsistencyInvariants) {
  WinRateMatrix m({"a", "b", "c"});
  std::mt19937_64 rng(2);
  for (int i = 0; i < 500; ++i) {
    const auto x = rng() % 3;
    const auto y = (x + 1 + rng() % 2) % 3;
    m.record(x, y, static_cast<double>(rng() % 3) / 2.0);
  }
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) {
      if (!m.played(i, j)) continue;
      EXPECT_NEAR(m.win_pct(i, j) + m.draw_pct(i, j) + m.loss_pct(i, j), 100.0, 1e-9);
      EXPECT_EQ(m.win_pct(i, j), m.loss_pct(j, i));
      EXPECT_EQ(m.draw_pct(i, j), m.draw_pct(j, i));
    }
  }
  EXPECT_THROW(m.record(0, 0, 1.0), Error);
  EXPECT_THROW(m.record(0, 1, 0.25), Error);
}

TEST(Export, MatrixCsvRoundTripsAndMarksUnplayed) {
  WinRateMatrix m({"a", "b", "c"});
  m.record(0, 1, 1.0);
  m.record(0, 1, 0.5);
  m.record(1, 0, 1.0);
  const std::string csv = export_matrix_csv(m);
  EXPECT_NE(csv.find("33.3/33.3/33.3"), std::string::npos);
  std::vector<std::string> models;
  const auto cells = parse_matrix_csv(csv, &models);
  EXPECT_EQ(models, m.models());
  ASSERT_TRUE(cells[0][1].has_value());
  EXPECT_NEAR(cells[0][1]->win, 33.3, 1e-12);
  EXPECT_FALSE(cells[0][2].has_value());
  EXPECT_FALSE(cells[1][1].has_value());
  EXPECT_NE(csv.find(",-"), std::string::npos);
  EXPECT_EQ(parse_matrix_records(export_matrix_records(m), m.models()), m);
}

TEST(Export, RatingsAndLogRoundTrip) {
  const auto exam = exam_of(6);
  const std::vector<AnswerSheet> sheets = {sheet_with("a", exam, {true, true, false, true, false, true}),
                                           sheet_with("b", exam, {false, true, true, true, false, false}),
                                           sheet_with("c", exam, {true, false, false, false, true, true})};
  const auto result = run_tournament(sheets, exam, 8);
  EXPECT_EQ(parse_ratings_records(export_ratings_records(result.ratings)), result.ratings);
  EXPECT_EQ(parse_battle_log(export_battle_log(result.log)), result.log);
  const std::string table = export_ratings(result.ratings);
  EXPECT_NE(table.find("rating"), std::string::npos);
}

}  // namespace
}  // namespace lexfuse::arena
