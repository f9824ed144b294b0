#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ragxlate/codebleu.hpp"
#include "ragxlate/llmclient.hpp"
#include "ragxlate/vectorstore.hpp"

namespace ragxlate {

struct AggregateStat {
  double mean = 0.0;
  double sem = 0.0;  // sample standard deviation (n-1) / sqrt(n); 0 when n = 1
  int n = 0;
};

// ArgumentError on an empty list.
AggregateStat aggregate(const std::vector<double>& scores);

struct DeltaRow {
  std::string model_id;
  double zero_shot = 0.0;
  std::map<int, double> deltas;  // k (>= 1) -> mean_k - mean_0, exact subtraction
};

using StatKey = std::pair<std::string, int>;  // (model_id, k)

// Requires a k = 0 entry for every model (ArgumentError otherwise). Rows come
// back sorted by model_id.
std::vector<DeltaRow> delta_table(const std::map<StatKey, AggregateStat>& per_k_stats);

// "+0.363" / "-0.042" / "+0.000": sign always shown, three decimals.
std::string format_signed3(double v);

// Markdown emitters. Deterministic bytes for fixed input.
std::string delta_table_markdown(const std::vector<DeltaRow>& rows);
std::string summary_table_markdown(const std::map<StatKey, AggregateStat>& stats);

struct PairwiseMatrix {
  std::vector<std::string> model_ids;  // sorted
  Matrix values;
};

// Entry (i,j) = mean over aligned queries of
// (codebleu(out_i, out_j).combined + codebleu(out_j, out_i).combined) / 2 —
// the metric is asymmetric, so both directions are averaged. Symmetric by
// construction with a unit diagonal. Candidate lists must be non-empty and
// aligned index-by-index (ArgumentError otherwise).
PairwiseMatrix pairwise_matrix(
    const std::map<std::string, std::vector<std::string>>& candidates_by_model);

// Groups successful candidates by model, keeping only (query, k) cells that
// every model translated successfully, so the per-model lists line up
// index-by-index (sorted by query id, then k). May come back empty.
std::map<std::string, std::vector<std::string>> aligned_candidates(
    const std::vector<TranslationResult>& results);

// One scored translation, as persisted in scores.jsonl.
struct ScoreRow {
  std::string query_id;
  std::string model_id;
  int k_requested = 0;
  int shots = 0;
  std::string status;  // "ok" | "context_overflow" | "transport_failure" | "no_reference"
  double ngram = 0.0;
  double weighted_ngram = 0.0;
  double syntax = 0.0;
  std::optional<double> dataflow;
  double combined = 0.0;
  std::optional<double> shot_similarity;  // rank-1 retrieval score (k >= 1)
  std::optional<double> shot_combined;    // candidate scored against the rank-1 shot
};

std::string score_row_to_jsonl(const ScoreRow& row);
ScoreRow score_row_from_json_line(const std::string& line);
std::vector<ScoreRow> load_scores(const std::string& path);

// Scores every translation row: full CodeBLEU against the query's reference
// from `references`, plus the candidate scored against the rank-1 shot's
// target code (shot_combined, k >= 1 only). A missing or unlabeled reference
// yields status "no_reference"; failed rows keep their status with zero
// scores. Output order follows `results`.
std::vector<ScoreRow> score_results(
    const std::vector<TranslationResult>& results, const Dataset& references,
    const std::array<double, 4>& weights = kDefaultWeights,
    double kw_weight = kDefaultKeywordWeight);

struct ScatterPoint {
  std::string query_id;
  std::string model_id;
  int k = 0;
  double shot_similarity = 0.0;
  double codebleu_combined = 0.0;
};

// One point per successful row with k >= 1 and a recorded rank-1 retrieval
// score; k = 0 rows are excluded by definition.
std::vector<ScatterPoint> scatter_data(const std::vector<ScoreRow>& rows);
std::string scatter_csv(const std::vector<ScatterPoint>& points);

// CSV with a label header column/row; values round-trip exactly (%.17g).
std::string matrix_csv(const Matrix& m, const std::vector<std::string>& labels);
Matrix load_matrix_csv(const std::string& path, std::vector<std::string>* labels);

// Self-contained SVG heatmap with a value-annotated grid (%.2f per cell),
// colors scaled between the matrix min and max, plus the CSV twin. Bytes are
// deterministic for fixed input. ArgumentError when labels don't match the
// matrix size.
void render_heatmap(const Matrix& m, const std::vector<std::string>& labels,
                    const std::string& svg_path, const std::string& csv_path,
                    const std::string& title = "");

}  // namespace ragxlate
