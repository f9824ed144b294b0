// Tests for aggregation statistics, delta/summary tables, pairwise agreement
// matrices, score persistence, scatter/matrix CSV emitters, and SVG heatmaps.

#include <gtest/gtest.h>
#include <unistd.h>

#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "ragxlate/codebleu.hpp"
#include "ragxlate/corpus.hpp"
#include "ragxlate/errors.hpp"
#include "ragxlate/llmclient.hpp"
#include "ragxlate/report.hpp"

namespace {

using namespace ragxlate;
namespace fs = std::filesystem;

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    dir_ = fs::temp_directory_path() /
           ("ragxlate_report_test_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter++));
    fs::create_directories(dir_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(dir_, ec);
  }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

 private:
  fs::path dir_;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

int count_occurrences(const std::string& hay, const std::string& needle) {
  int n = 0;
  for (std::size_t pos = hay.find(needle); pos != std::string::npos;
       pos = hay.find(needle, pos + needle.size()))
    ++n;
  return n;
}

// ---------------------------------------------------------------------------
// aggregate
// ---------------------------------------------------------------------------

TEST(Aggregate, MeanAndSemMatchHandComputation) {
  // Left-to-right double accumulation: 0.2 + 0.4 + 0.6 = 1.2000000000000002,
  // divided by 3 gives exactly 0.4000000000000001.
  const AggregateStat s = aggregate({0.2, 0.4, 0.6});
  EXPECT_EQ(s.n, 3);
  EXPECT_EQ(s.mean, 0.4000000000000001);
  // sqrt(sample variance / n) = sqrt(0.04 / 3) = 0.11547005383792515...
  EXPECT_DOUBLE_EQ(s.sem, 0.11547005383792515);
}

TEST(Aggregate, SingleValueHasZeroSem) {
  const AggregateStat s = aggregate({0.7});
  EXPECT_EQ(s.n, 1);
  EXPECT_EQ(s.mean, 0.7);
  EXPECT_EQ(s.sem, 0.0);
}

TEST(Aggregate, EmptyListThrows) {
  EXPECT_THROW(aggregate({}), ArgumentError);
}

TEST(Aggregate, MatchesHighPrecisionRecomputation) {
  std::mt19937 rng(20240817);
  std::uniform_real_distribution<double> score(0.0, 1.0);
  std::uniform_int_distribution<int> len(1, 40);
  for (int iter = 0; iter < 100; ++iter) {
    std::vector<double> xs(static_cast<std::size_t>(len(rng)));
    for (double& x : xs) x = score(rng);

    const AggregateStat s = aggregate(xs);

    long double sum = 0.0L;
    for (const double x : xs) sum += x;
    const long double mean = sum / static_cast<long double>(xs.size());
    ASSERT_NEAR(s.mean, static_cast<double>(mean), 1e-12);

    if (xs.size() == 1) {
      ASSERT_EQ(s.sem, 0.0);
    } else {
      long double ss = 0.0L;
      for (const double x : xs) ss += (x - mean) * (x - mean);
      const long double sem =
          sqrtl(ss / static_cast<long double>(xs.size() - 1)) /
          sqrtl(static_cast<long double>(xs.size()));
      ASSERT_NEAR(s.sem, static_cast<double>(sem), 1e-12);
    }
  }
}

// ---------------------------------------------------------------------------
// delta_table / format_signed3
// ---------------------------------------------------------------------------

TEST(DeltaTable, ComputesExactDifferencesOfMeans) {
  std::map<StatKey, AggregateStat> stats;
  stats[{"alpha", 0}] = {0.237, 0.01, 12};
  stats[{"alpha", 1}] = {0.600, 0.02, 12};
  stats[{"alpha", 3}] = {0.300, 0.02, 12};
  stats[{"beta", 0}] = {0.5, 0.0, 4};
  stats[{"beta", 1}] = {0.25, 0.0, 4};

  const std::vector<DeltaRow> rows = delta_table(stats);
  ASSERT_EQ(rows.size(), 2u);

  EXPECT_EQ(rows[0].model_id, "alpha");
  EXPECT_EQ(rows[0].zero_shot, 0.237);
  ASSERT_EQ(rows[0].deltas.size(), 2u);
  // Plain double subtraction, no rounding detour: 0.600 - 0.237 == 0.363
  // holds bitwise for these operands.
  EXPECT_EQ(rows[0].deltas.at(1), 0.363);
  EXPECT_TRUE(rows[0].deltas.count(3));

  EXPECT_EQ(rows[1].model_id, "beta");
  EXPECT_EQ(rows[1].zero_shot, 0.5);
  // 0.25 and 0.5 are exact binary fractions, so the delta is exactly -0.25.
  EXPECT_EQ(rows[1].deltas.at(1), -0.25);
}

TEST(DeltaTable, RowsComeBackSortedByModelId) {
  std::map<StatKey, AggregateStat> stats;
  stats[{"zeta", 0}] = {0.1, 0.0, 1};
  stats[{"alpha", 0}] = {0.2, 0.0, 1};
  stats[{"mid", 0}] = {0.3, 0.0, 1};

  const std::vector<DeltaRow> rows = delta_table(stats);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0].model_id, "alpha");
  EXPECT_EQ(rows[1].model_id, "mid");
  EXPECT_EQ(rows[2].model_id, "zeta");
}

TEST(DeltaTable, MissingZeroShotBaselineThrows) {
  std::map<StatKey, AggregateStat> stats;
  stats[{"solo", 1}] = {0.9, 0.0, 3};
  try {
    delta_table(stats);
    FAIL() << "expected ArgumentError";
  } catch (const ArgumentError& e) {
    EXPECT_NE(std::string(e.what()).find("model 'solo' has no k = 0 baseline"),
              std::string::npos)
        << e.what();
  }
}

TEST(FormatSigned3, SignAlwaysShownWithThreeDecimals) {
  EXPECT_EQ(format_signed3(0.432 - 0.283), "+0.149");
  EXPECT_EQ(format_signed3(0.363), "+0.363");
  EXPECT_EQ(format_signed3(-0.042), "-0.042");
  EXPECT_EQ(format_signed3(0.0), "+0.000");
}

// ---------------------------------------------------------------------------
// markdown emitters
// ---------------------------------------------------------------------------

TEST(Markdown, DeltaTableBytesAreExact) {
  std::vector<DeltaRow> rows(2);
  rows[0].model_id = "alpha";
  rows[0].zero_shot = 0.5;
  rows[0].deltas = {{1, 0.149}, {2, 0.3}};
  rows[1].model_id = "beta";
  rows[1].zero_shot = 0.25;
  rows[1].deltas = {{1, -0.1}};

  const std::string expected =
      "| model | k=0 | Δ(k=1) | Δ(k=2) |\n"
      "|---|---|---|---|\n"
      "| alpha | 0.500 | +0.149 | +0.300 |\n"
      "| beta | 0.250 | -0.100 | — |\n";
  EXPECT_EQ(delta_table_markdown(rows), expected);
}

TEST(Markdown, SummaryTableBytesAreExact) {
  std::map<StatKey, AggregateStat> stats;
  stats[{"alpha", 0}] = {0.237, 0.0123, 12};
  stats[{"alpha", 1}] = {0.600, 0.058, 12};
  stats[{"beta", 1}] = {0.75, 0.0, 1};

  const std::string expected =
      "| model | k=0 | k=1 |\n"
      "|---|---|---|\n"
      "| alpha | 0.237 ± 0.012 (n=12) | 0.600 ± 0.058 (n=12) |\n"
      "| beta | — | 0.750 ± 0.000 (n=1) |\n";
  EXPECT_EQ(summary_table_markdown(stats), expected);
}

TEST(Markdown, EmptyInputsYieldHeaderOnlyTables) {
  EXPECT_EQ(delta_table_markdown({}), "| model | k=0 |\n|---|---|\n");
  EXPECT_EQ(summary_table_markdown({}), "| model |\n|---|\n");
}

// ---------------------------------------------------------------------------
// pairwise_matrix / aligned_candidates
// ---------------------------------------------------------------------------

TEST(PairwiseMatrix, SymmetricWithUnitDiagonal) {
  std::map<std::string, std::vector<std::string>> cands;
  cands["ma"] = {"int a = b;", "x = 1"};
  cands["mb"] = {"int a = c;", "x = 1"};
  cands["mc"] = {"int a = b;", "y = 2"};

  const PairwiseMatrix pm = pairwise_matrix(cands);
  ASSERT_EQ(pm.model_ids, (std::vector<std::string>{"ma", "mb", "mc"}));
  ASSERT_EQ(pm.values.n, 3u);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(pm.values.at(i, i), 1.0);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j)
      EXPECT_EQ(pm.values.at(i, j), pm.values.at(j, i));

  // Mirror the documented formula for one cell: the per-query mean of the
  // two-direction average (the metric itself is asymmetric).
  double sum = 0.0;
  sum += (codebleu("int a = b;", "int a = c;").combined +
          codebleu("int a = c;", "int a = b;").combined) /
         2.0;
  sum += (codebleu("x = 1", "x = 1").combined +
          codebleu("x = 1", "x = 1").combined) /
         2.0;
  EXPECT_EQ(pm.values.at(0, 1), sum / 2.0);
}

TEST(PairwiseMatrix, IdenticalOutputsScoreOne) {
  std::map<std::string, std::vector<std::string>> cands;
  cands["ma"] = {"for (int i = 0; i < n; ++i) s += a[i];"};
  cands["mb"] = {"for (int i = 0; i < n; ++i) s += a[i];"};
  const PairwiseMatrix pm = pairwise_matrix(cands);
  EXPECT_EQ(pm.values.at(0, 1), 1.0);
}

TEST(PairwiseMatrix, MisalignedCandidateListsThrow) {
  std::map<std::string, std::vector<std::string>> cands;
  cands["ma"] = {"a", "b"};
  cands["mb"] = {"a"};
  try {
    pairwise_matrix(cands);
    FAIL() << "expected ArgumentError";
  } catch (const ArgumentError& e) {
    EXPECT_NE(std::string(e.what()).find("not aligned"), std::string::npos);
  }
}

TEST(PairwiseMatrix, EmptyInputsThrow) {
  EXPECT_THROW(pairwise_matrix({}), ArgumentError);
  std::map<std::string, std::vector<std::string>> empty_lists;
  empty_lists["m"] = {};
  EXPECT_THROW(pairwise_matrix(empty_lists), ArgumentError);
}

namespace {

TranslationResult tr(const std::string& query, const std::string& model, int k,
                     TranslationStatus status, const std::string& cand) {
  TranslationResult r;
  r.query_id = query;
  r.model_id = model;
  r.k_requested = k;
  r.status = status;
  r.candidate_cpp = cand;
  return r;
}

}  // namespace

TEST(AlignedCandidates, KeepsOnlyCellsCoveredByEveryModel) {
  std::vector<TranslationResult> results;
  results.push_back(tr("q2", "m1", 0, TranslationStatus::Ok, "A21"));
  results.push_back(tr("q2", "m2", 0, TranslationStatus::Ok, "B21"));
  results.push_back(tr("q1", "m1", 0, TranslationStatus::Ok, "A10"));
  results.push_back(tr("q1", "m2", 0, TranslationStatus::Ok, "B10"));
  // one model failed this cell -> the whole cell is dropped
  results.push_back(tr("q1", "m1", 1, TranslationStatus::Ok, "A11"));
  results.push_back(tr("q1", "m2", 1, TranslationStatus::TransportFailure, ""));
  // only one model ever saw this query -> dropped
  results.push_back(tr("q3", "m1", 0, TranslationStatus::Ok, "A30"));

  const auto aligned = aligned_candidates(results);
  ASSERT_EQ(aligned.size(), 2u);
  EXPECT_EQ(aligned.at("m1"), (std::vector<std::string>{"A10", "A21"}));
  EXPECT_EQ(aligned.at("m2"), (std::vector<std::string>{"B10", "B21"}));
}

TEST(AlignedCandidates, EmptyWhenNothingLinesUp) {
  EXPECT_TRUE(aligned_candidates({}).empty());

  std::vector<TranslationResult> results;
  results.push_back(tr("q1", "m1", 0, TranslationStatus::Ok, "A"));
  results.push_back(tr("q2", "m2", 0, TranslationStatus::Ok, "B"));
  EXPECT_TRUE(aligned_candidates(results).empty());
}

// ---------------------------------------------------------------------------
// score row serialization
// ---------------------------------------------------------------------------

ScoreRow full_row() {
  ScoreRow row;
  row.query_id = "q1";
  row.model_id = "m1";
  row.k_requested = 2;
  row.shots = 1;
  row.status = "ok";
  row.ngram = 0.25;
  row.weighted_ngram = 0.5;
  row.syntax = 0.75;
  row.dataflow = 1.0;
  row.combined = 0.625;
  row.shot_similarity = 0.93;
  row.shot_combined = 0.40000000000000002;
  return row;
}

TEST(ScoreRowJsonl, RoundTripsEveryField) {
  const ScoreRow row = full_row();
  const std::string line = score_row_to_jsonl(row);
  // keys come out alphabetically sorted, so the line always starts with
  // "combined" — a cheap determinism canary
  EXPECT_EQ(line.rfind("{\"combined\":", 0), 0u) << line;

  const ScoreRow back = score_row_from_json_line(line);
  EXPECT_EQ(back.query_id, row.query_id);
  EXPECT_EQ(back.model_id, row.model_id);
  EXPECT_EQ(back.k_requested, row.k_requested);
  EXPECT_EQ(back.shots, row.shots);
  EXPECT_EQ(back.status, row.status);
  EXPECT_EQ(back.ngram, row.ngram);
  EXPECT_EQ(back.weighted_ngram, row.weighted_ngram);
  EXPECT_EQ(back.syntax, row.syntax);
  ASSERT_TRUE(back.dataflow.has_value());
  EXPECT_EQ(*back.dataflow, *row.dataflow);
  EXPECT_EQ(back.combined, row.combined);
  ASSERT_TRUE(back.shot_similarity.has_value());
  EXPECT_EQ(*back.shot_similarity, *row.shot_similarity);
  ASSERT_TRUE(back.shot_combined.has_value());
  EXPECT_EQ(*back.shot_combined, *row.shot_combined);

  // serialization is a fixed point
  EXPECT_EQ(score_row_to_jsonl(back), line);
}

TEST(ScoreRowJsonl, NullDataflowAndOmittedOptionals) {
  ScoreRow row = full_row();
  row.dataflow.reset();
  row.shot_similarity.reset();
  row.shot_combined.reset();

  const std::string line = score_row_to_jsonl(row);
  EXPECT_NE(line.find("\"dataflow\":null"), std::string::npos) << line;
  EXPECT_EQ(line.find("shot_similarity"), std::string::npos) << line;
  EXPECT_EQ(line.find("shot_combined"), std::string::npos) << line;

  const ScoreRow back = score_row_from_json_line(line);
  EXPECT_FALSE(back.dataflow.has_value());
  EXPECT_FALSE(back.shot_similarity.has_value());
  EXPECT_FALSE(back.shot_combined.has_value());
}

TEST(ScoreRowJsonl, MalformedLinesThrow) {
  EXPECT_THROW(score_row_from_json_line("not json"), ParseError);
  EXPECT_THROW(score_row_from_json_line("[1,2]"), ParseError);
  // valid JSON object but missing a required key
  EXPECT_THROW(score_row_from_json_line("{\"model_id\":\"m\"}"), ParseError);
  // wrong type for a required key
  EXPECT_THROW(score_row_from_json_line("{\"query_id\":1,\"model_id\":\"m\"}"),
               ParseError);
}

TEST(ScoreRowJsonl, LoadScoresRoundTripsThroughFile) {
  TempDir tmp;
  ScoreRow a = full_row();
  ScoreRow b = full_row();
  b.query_id = "q2";
  b.dataflow.reset();
  const std::string path = tmp.path("scores.jsonl");
  spit(path, score_row_to_jsonl(a) + "\n\n" + score_row_to_jsonl(b) + "\n");

  const std::vector<ScoreRow> rows = load_scores(path);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].query_id, "q1");
  EXPECT_EQ(rows[1].query_id, "q2");
  EXPECT_FALSE(rows[1].dataflow.has_value());
}

TEST(ScoreRowJsonl, LoadScoresReportsPathAndLine) {
  TempDir tmp;
  const std::string path = tmp.path("bad.jsonl");
  spit(path, score_row_to_jsonl(full_row()) + "\ngarbage\n");
  try {
    load_scores(path);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find(path), std::string::npos) << msg;
    EXPECT_NE(msg.find(":2:"), std::string::npos) << msg;
  }
}

// ---------------------------------------------------------------------------
// score_results
// ---------------------------------------------------------------------------

class ScoreResultsTest : public ::testing::Test {
 protected:
  void SetUp() override {
    refs_.name = "refs";
    refs_.pairs.push_back({"q1", "x = y", "int x = y;", "refs", 5});
    refs_.pairs.push_back({"q2", "a = 1", "", "refs", 5});  // unlabeled reference
    refs_.pairs.push_back({"e1", "b = 2", "int b = 2;", "refs", 5});
    refs_.labeled = false;
  }

  static TranslationResult ok_row(const std::string& query,
                                  const std::string& cand, int k,
                                  std::vector<std::string> example_ids,
                                  std::vector<double> shot_scores) {
    TranslationResult r = tr(query, "m1", k, TranslationStatus::Ok, cand);
    r.shots = static_cast<int>(example_ids.size());
    r.example_ids = std::move(example_ids);
    r.shot_scores = std::move(shot_scores);
    return r;
  }

  Dataset refs_;
};

TEST_F(ScoreResultsTest, OkRowScoredAgainstReference) {
  const std::vector<TranslationResult> results = {
      ok_row("q1", "int x = y;", 1, {"e1"}, {0.93})};
  const std::vector<ScoreRow> rows = score_results(results, refs_);
  ASSERT_EQ(rows.size(), 1u);
  const ScoreRow& row = rows[0];

  EXPECT_EQ(row.query_id, "q1");
  EXPECT_EQ(row.status, "ok");
  EXPECT_EQ(row.k_requested, 1);
  EXPECT_EQ(row.shots, 1);

  const CodeBleuScore expect = codebleu("int x = y;", "int x = y;");
  EXPECT_EQ(row.ngram, expect.ngram);
  EXPECT_EQ(row.weighted_ngram, expect.weighted_ngram);
  EXPECT_EQ(row.syntax, expect.syntax);
  EXPECT_EQ(row.dataflow.has_value(), expect.dataflow.has_value());
  EXPECT_EQ(row.combined, 1.0);

  ASSERT_TRUE(row.shot_similarity.has_value());
  EXPECT_EQ(*row.shot_similarity, 0.93);
  ASSERT_TRUE(row.shot_combined.has_value());
  EXPECT_EQ(*row.shot_combined, codebleu("int x = y;", "int b = 2;").combined);
}

TEST_F(ScoreResultsTest, MissingOrEmptyReferenceYieldsNoReferenceStatus) {
  const std::vector<TranslationResult> results = {
      ok_row("zzz", "int z;", 0, {}, {}),  // id absent from references
      ok_row("q2", "int a = 1;", 0, {}, {})};  // reference has no target code
  const std::vector<ScoreRow> rows = score_results(results, refs_);
  ASSERT_EQ(rows.size(), 2u);
  for (const ScoreRow& row : rows) {
    EXPECT_EQ(row.status, "no_reference");
    EXPECT_EQ(row.ngram, 0.0);
    EXPECT_EQ(row.combined, 0.0);
    EXPECT_FALSE(row.dataflow.has_value());
  }
}

TEST_F(ScoreResultsTest, NoReferenceRowStillScoresItsShot) {
  // The candidate exists even when the query has no reference, so the
  // candidate-vs-shot score is still meaningful and still computed.
  const std::vector<TranslationResult> results = {
      ok_row("q2", "int b = 2;", 1, {"e1"}, {0.8})};
  const std::vector<ScoreRow> rows = score_results(results, refs_);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].status, "no_reference");
  ASSERT_TRUE(rows[0].shot_combined.has_value());
  EXPECT_EQ(*rows[0].shot_combined, 1.0);  // candidate matches the shot exactly
}

TEST_F(ScoreResultsTest, FailedRowsKeepStatusAndZeroScores) {
  TranslationResult fail = tr("q1", "m1", 1, TranslationStatus::TransportFailure, "");
  fail.shot_scores = {0.5};
  fail.example_ids = {"e1"};
  TranslationResult overflow = tr("q1", "m1", 9, TranslationStatus::ContextOverflow, "");

  const std::vector<ScoreRow> rows = score_results({fail, overflow}, refs_);
  ASSERT_EQ(rows.size(), 2u);

  EXPECT_EQ(rows[0].status, "transport_failure");
  EXPECT_EQ(rows[0].combined, 0.0);
  // the retrieval score was recorded before the model call failed
  ASSERT_TRUE(rows[0].shot_similarity.has_value());
  EXPECT_EQ(*rows[0].shot_similarity, 0.5);
  EXPECT_FALSE(rows[0].shot_combined.has_value());

  EXPECT_EQ(rows[1].status, "context_overflow");
  EXPECT_FALSE(rows[1].shot_similarity.has_value());
}

TEST_F(ScoreResultsTest, UnresolvableShotOmitsShotCombined) {
  const std::vector<TranslationResult> results = {
      ok_row("q1", "int x = y;", 1, {"ghost"}, {0.9}),  // shot id unknown
      ok_row("q1", "int x = y;", 1, {"q2"}, {0.9})};    // shot has no target code
  const std::vector<ScoreRow> rows = score_results(results, refs_);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_FALSE(rows[0].shot_combined.has_value());
  EXPECT_FALSE(rows[1].shot_combined.has_value());
  // shot_similarity is independent of shot resolution
  EXPECT_TRUE(rows[0].shot_similarity.has_value());
}

TEST_F(ScoreResultsTest, OutputOrderFollowsInput) {
  const std::vector<TranslationResult> results = {
      ok_row("q2", "c2", 0, {}, {}), ok_row("q1", "c1", 0, {}, {})};
  const std::vector<ScoreRow> rows = score_results(results, refs_);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].query_id, "q2");
  EXPECT_EQ(rows[1].query_id, "q1");
}

TEST_F(ScoreResultsTest, WeightsAndKeywordWeightArePassedThrough) {
  const std::array<double, 4> weights = {1.0, 0.0, 0.0, 0.0};
  const std::vector<TranslationResult> results = {
      ok_row("q1", "int x = z;", 0, {}, {})};
  const std::vector<ScoreRow> rows =
      score_results(results, refs_, weights, 2.0);
  ASSERT_EQ(rows.size(), 1u);
  const CodeBleuScore expect = codebleu("int x = z;", "int x = y;", weights, 2.0);
  EXPECT_EQ(rows[0].combined, expect.combined);
  EXPECT_EQ(rows[0].combined, rows[0].ngram);
}

// ---------------------------------------------------------------------------
// scatter plot data
// ---------------------------------------------------------------------------

TEST(Scatter, FiltersToSuccessfulFewShotRows) {
  ScoreRow keep = full_row();
  keep.k_requested = 1;
  keep.shot_similarity = 0.25;
  keep.combined = 0.5;

  ScoreRow zero_shot = full_row();
  zero_shot.k_requested = 0;

  ScoreRow no_sim = full_row();
  no_sim.k_requested = 2;
  no_sim.shot_similarity.reset();

  ScoreRow failed = full_row();
  failed.k_requested = 1;
  failed.status = "transport_failure";

  const std::vector<ScatterPoint> pts =
      scatter_data({keep, zero_shot, no_sim, failed});
  ASSERT_EQ(pts.size(), 1u);
  EXPECT_EQ(pts[0].query_id, "q1");
  EXPECT_EQ(pts[0].model_id, "m1");
  EXPECT_EQ(pts[0].k, 1);
  EXPECT_EQ(pts[0].shot_similarity, 0.25);
  EXPECT_EQ(pts[0].codebleu_combined, 0.5);
}

TEST(Scatter, CsvBytesAreExact) {
  std::vector<ScatterPoint> pts(2);
  pts[0] = {"q1", "m1", 1, 0.25, 0.5};
  pts[1] = {"q2", "m,2", 2, 1.0, 0.1};  // comma in the model id forces quoting

  const std::string expected =
      "query_id,model_id,k,shot_similarity,codebleu_combined\n"
      "q1,m1,1,0.25,0.5\n"
      "q2,\"m,2\",2,1,0.10000000000000001\n";
  EXPECT_EQ(scatter_csv(pts), expected);
}

TEST(Scatter, EmptyPointsYieldHeaderOnly) {
  EXPECT_EQ(scatter_csv({}),
            "query_id,model_id,k,shot_similarity,codebleu_combined\n");
}

// ---------------------------------------------------------------------------
// matrix CSV
// ---------------------------------------------------------------------------

TEST(MatrixCsv, BytesAreExactAndRoundTripBitwise) {
  Matrix m;
  m.n = 2;
  m.cells = {1.0, 1.0 / 3.0, 0.1, 0.9938837346736189};
  const std::vector<std::string> labels = {"a", "b,x"};

  const std::string csv = matrix_csv(m, labels);
  const std::string expected =
      "label,a,\"b,x\"\n"
      "a,1,0.33333333333333331\n"
      "\"b,x\",0.10000000000000001,0.9938837346736189\n";
  EXPECT_EQ(csv, expected);

  TempDir tmp;
  const std::string path = tmp.path("matrix.csv");
  spit(path, csv);
  std::vector<std::string> back_labels;
  const Matrix back = load_matrix_csv(path, &back_labels);
  ASSERT_EQ(back.n, 2u);
  EXPECT_EQ(back_labels, labels);
  for (std::size_t i = 0; i < m.cells.size(); ++i)
    EXPECT_EQ(back.cells[i], m.cells[i]) << "cell " << i;
}

TEST(MatrixCsv, LabelCountMismatchThrows) {
  Matrix m;
  m.n = 2;
  m.cells = {1, 0, 0, 1};
  EXPECT_THROW(matrix_csv(m, {"only-one"}), ArgumentError);
}

TEST(MatrixCsv, LoadAcceptsNullLabelsPointer) {
  TempDir tmp;
  const std::string path = tmp.path("m.csv");
  spit(path, "label,a\na,0.5\n");
  const Matrix m = load_matrix_csv(path, nullptr);
  ASSERT_EQ(m.n, 1u);
  EXPECT_EQ(m.cells[0], 0.5);
}

TEST(MatrixCsv, LoadRejectsMalformedFiles) {
  TempDir tmp;

  const std::string empty = tmp.path("empty.csv");
  spit(empty, "");
  EXPECT_THROW(load_matrix_csv(empty, nullptr), ParseError);

  const std::string no_labels = tmp.path("no_labels.csv");
  spit(no_labels, "label\n");
  EXPECT_THROW(load_matrix_csv(no_labels, nullptr), ParseError);

  const std::string short_row = tmp.path("short_row.csv");
  spit(short_row, "label,a,b\na,1\nb,0,1\n");
  try {
    load_matrix_csv(short_row, nullptr);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find(":2:"), std::string::npos) << e.what();
  }

  const std::string bad_cell = tmp.path("bad_cell.csv");
  spit(bad_cell, "label,a\na,not-a-number\n");
  try {
    load_matrix_csv(bad_cell, nullptr);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("non-numeric"), std::string::npos);
  }

  const std::string extra_row = tmp.path("extra_row.csv");
  spit(extra_row, "label,a\na,1\nb,2\n");
  try {
    load_matrix_csv(extra_row, nullptr);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("more rows"), std::string::npos);
  }

  const std::string missing_row = tmp.path("missing_row.csv");
  spit(missing_row, "label,a,b\na,1,0\n");
  try {
    load_matrix_csv(missing_row, nullptr);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("fewer rows"), std::string::npos);
  }
}

// ---------------------------------------------------------------------------
// SVG heatmap
// ---------------------------------------------------------------------------

TEST(Heatmap, WritesDeterministicSvgWithCsvTwin) {
  TempDir tmp;
  Matrix m;
  m.n = 2;
  m.cells = {1.0, 0.2, 0.2, 1.0};
  const std::vector<std::string> labels = {"m1", "m2"};

  const std::string svg1 = tmp.path("a.svg");
  const std::string csv1 = tmp.path("a.csv");
  render_heatmap(m, labels, svg1, csv1, "model agreement");
  const std::string svg2 = tmp.path("b.svg");
  const std::string csv2 = tmp.path("b.csv");
  render_heatmap(m, labels, svg2, csv2, "model agreement");

  const std::string svg = slurp(svg1);
  EXPECT_EQ(svg, slurp(svg2));
  EXPECT_EQ(slurp(csv1), matrix_csv(m, labels));
  EXPECT_EQ(slurp(csv1), slurp(csv2));

  EXPECT_EQ(svg.rfind("<svg xmlns=\"http://www.w3.org/2000/svg\"", 0), 0u);
  EXPECT_NE(svg.find(">model agreement</text>"), std::string::npos);
  EXPECT_NE(svg.find(">m1</text>"), std::string::npos);
  EXPECT_NE(svg.find(">1.00</text>"), std::string::npos);
  EXPECT_NE(svg.find(">0.20</text>"), std::string::npos);
  EXPECT_EQ(svg.substr(svg.size() - 7), "</svg>\n");
  // every cell is annotated: n*n value labels
  EXPECT_EQ(count_occurrences(svg, "text-anchor=\"middle\""), 4);
}

TEST(Heatmap, DarkCellsGetWhiteAnnotations) {
  TempDir tmp;
  Matrix m;
  m.n = 2;
  m.cells = {1.0, 0.2, 0.2, 1.0};
  const std::string svg_path = tmp.path("h.svg");
  render_heatmap(m, {"m1", "m2"}, svg_path, tmp.path("h.csv"), "");
  const std::string svg = slurp(svg_path);
  // the two 1.0 diagonal cells sit at the dark end of the scale; the inline
  // style must accompany the attribute or the stylesheet would override it
  EXPECT_EQ(count_occurrences(svg, "fill=\"white\" style=\"fill:white\""), 2);
}

TEST(Heatmap, EscapesLabelsAndTitle) {
  TempDir tmp;
  Matrix m;
  m.n = 2;
  m.cells = {1.0, 0.5, 0.5, 1.0};
  const std::string svg_path = tmp.path("esc.svg");
  render_heatmap(m, {"a<b", "m&c"}, svg_path, "", "x \"vs\" y");
  const std::string svg = slurp(svg_path);
  EXPECT_NE(svg.find("a&lt;b"), std::string::npos);
  EXPECT_NE(svg.find("m&amp;c"), std::string::npos);
  EXPECT_NE(svg.find("x &quot;vs&quot; y"), std::string::npos);
  EXPECT_EQ(svg.find("a<b"), std::string::npos);
}

TEST(Heatmap, EmptyCsvPathSkipsCsvAndEmptyTitleSkipsHeading) {
  TempDir tmp;
  Matrix m;
  m.n = 1;
  m.cells = {0.5};
  const std::string svg_path = tmp.path("only.svg");
  render_heatmap(m, {"m"}, svg_path, "", "");
  EXPECT_TRUE(fs::exists(svg_path));
  const std::string svg = slurp(svg_path);
  EXPECT_EQ(svg.find("class=\"t\""), std::string::npos);
}

TEST(Heatmap, UniformMatrixRendersSolidScale) {
  TempDir tmp;
  Matrix m;
  m.n = 2;
  m.cells = {0.5, 0.5, 0.5, 0.5};
  const std::string svg_path = tmp.path("uniform.svg");
  render_heatmap(m, {"m1", "m2"}, svg_path, "", "");
  const std::string svg = slurp(svg_path);
  // hi == lo pins every cell to the top of the color ramp
  EXPECT_EQ(count_occurrences(svg, "fill=\"#0d47a1\""), 4);
}

TEST(Heatmap, InvalidInputsThrow) {
  TempDir tmp;
  Matrix m;
  m.n = 2;
  m.cells = {1, 0, 0, 1};
  EXPECT_THROW(render_heatmap(m, {"one"}, tmp.path("x.svg"), "", ""),
               ArgumentError);
  Matrix empty;
  EXPECT_THROW(render_heatmap(empty, {}, tmp.path("y.svg"), "", ""),
               ArgumentError);
}

}  // namespace
