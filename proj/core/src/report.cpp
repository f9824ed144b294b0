#include "ragxlate/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include <json.hpp>

#include "io_util.hpp"
#include "ragxlate/codebleu.hpp"
#include "ragxlate/errors.hpp"

namespace ragxlate {

namespace {

using nlohmann::json;

std::string printf_format(const char* fmt, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), fmt, v);
  return buf;
}

std::string fmt3(double v) { return printf_format("%.3f", v); }
std::string fmt17(double v) { return printf_format("%.17g", v); }

// CSV cells hold model ids and numbers; ids with commas/quotes get quoted.
std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (const char c : s) {
    if (c == '"') out += "\"\"";
    out += c;
  }
  out += '"';
  return out;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t nl = text.find('\n', start);
    if (nl == std::string::npos) nl = text.size();
    std::string line = text.substr(start, nl - start);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
    start = nl + 1;
  }
  return lines;
}

}  // namespace

AggregateStat aggregate(const std::vector<double>& scores) {
  if (scores.empty()) throw ArgumentError("aggregate: empty score list");
  AggregateStat s;
  s.n = static_cast<int>(scores.size());
  double sum = 0.0;
  for (const double v : scores) sum += v;
  s.mean = sum / s.n;
  if (s.n > 1) {
    double ss = 0.0;
    for (const double v : scores) ss += (v - s.mean) * (v - s.mean);
    s.sem = std::sqrt(ss / (s.n - 1)) / std::sqrt(static_cast<double>(s.n));
  }
  return s;
}

std::vector<DeltaRow> delta_table(const std::map<StatKey, AggregateStat>& per_k_stats) {
  std::set<std::string> models;
  for (const auto& [key, stat] : per_k_stats) models.insert(key.first);

  std::vector<DeltaRow> rows;
  for (const std::string& model : models) {
    const auto base = per_k_stats.find({model, 0});
    if (base == per_k_stats.end())
      throw ArgumentError("delta_table: model '" + model + "' has no k = 0 baseline");
    DeltaRow row;
    row.model_id = model;
    row.zero_shot = base->second.mean;
    for (const auto& [key, stat] : per_k_stats) {
      if (key.first != model || key.second == 0) continue;
      row.deltas[key.second] = stat.mean - row.zero_shot;
    }
    rows.push_back(std::move(row));
  }
  return rows;  // std::set iteration already sorted by model_id
}

std::string format_signed3(double v) { return printf_format("%+.3f", v); }

std::string delta_table_markdown(const std::vector<DeltaRow>& rows) {
  std::set<int> ks;
  for (const DeltaRow& row : rows)
    for (const auto& [k, d] : row.deltas) ks.insert(k);

  std::string out = "| model | k=0 |";
  for (const int k : ks) out += " Δ(k=" + std::to_string(k) + ") |";
  out += "\n|---|---|";
  for (std::size_t i = 0; i < ks.size(); ++i) out += "---|";
  out += '\n';
  for (const DeltaRow& row : rows) {
    out += "| " + row.model_id + " | " + fmt3(row.zero_shot) + " |";
    for (const int k : ks) {
      const auto it = row.deltas.find(k);
      out += it == row.deltas.end() ? " — |" : " " + format_signed3(it->second) + " |";
    }
    out += '\n';
  }
  return out;
}

std::string summary_table_markdown(const std::map<StatKey, AggregateStat>& stats) {
  std::set<std::string> models;
  std::set<int> ks;
  for (const auto& [key, stat] : stats) {
    models.insert(key.first);
    ks.insert(key.second);
  }

  std::string out = "| model |";
  for (const int k : ks) out += " k=" + std::to_string(k) + " |";
  out += "\n|---|";
  for (std::size_t i = 0; i < ks.size(); ++i) out += "---|";
  out += '\n';
  for (const std::string& model : models) {
    out += "| " + model + " |";
    for (const int k : ks) {
      const auto it = stats.find({model, k});
      if (it == stats.end()) {
        out += " — |";
      } else {
        out += " " + fmt3(it->second.mean) + " ± " + fmt3(it->second.sem) + " (n=" +
               std::to_string(it->second.n) + ") |";
      }
    }
    out += '\n';
  }
  return out;
}

PairwiseMatrix pairwise_matrix(
    const std::map<std::string, std::vector<std::string>>& candidates_by_model) {
  if (candidates_by_model.empty())
    throw ArgumentError("pairwise_matrix: no models");
  const std::size_t rows = candidates_by_model.begin()->second.size();
  if (rows == 0) throw ArgumentError("pairwise_matrix: empty candidate lists");
  for (const auto& [model, cands] : candidates_by_model) {
    if (cands.size() != rows)
      throw ArgumentError("pairwise_matrix: candidate lists are not aligned (model '" +
                          model + "')");
  }

  PairwiseMatrix pm;
  for (const auto& [model, cands] : candidates_by_model)
    pm.model_ids.push_back(model);
  const std::size_t n = pm.model_ids.size();
  pm.values.n = n;
  pm.values.cells.assign(n * n, 0.0);

  std::vector<const std::vector<std::string>*> columns;
  for (const std::string& model : pm.model_ids)
    columns.push_back(&candidates_by_model.at(model));

  for (std::size_t i = 0; i < n; ++i) {
    pm.values.cells[i * n + i] = 1.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      double sum = 0.0;
      for (std::size_t q = 0; q < rows; ++q) {
        const std::string& a = (*columns[i])[q];
        const std::string& b = (*columns[j])[q];
        sum += (codebleu(a, b).combined + codebleu(b, a).combined) / 2.0;
      }
      const double mean = sum / rows;
      pm.values.cells[i * n + j] = mean;
      pm.values.cells[j * n + i] = mean;
    }
  }
  return pm;
}

std::map<std::string, std::vector<std::string>> aligned_candidates(
    const std::vector<TranslationResult>& results) {
  std::set<std::string> all_models;
  for (const TranslationResult& r : results) all_models.insert(r.model_id);

  std::map<std::pair<std::string, int>, std::map<std::string, const std::string*>>
      by_cell;
  for (const TranslationResult& r : results)
    if (r.status == TranslationStatus::Ok)
      by_cell[{r.query_id, r.k_requested}][r.model_id] = &r.candidate_cpp;

  std::map<std::string, std::vector<std::string>> aligned;
  for (const auto& [cell, per_model] : by_cell) {
    if (per_model.size() != all_models.size()) continue;
    for (const auto& [model, text] : per_model) aligned[model].push_back(*text);
  }
  return aligned;
}

std::string score_row_to_jsonl(const ScoreRow& row) {
  json j;
  j["query_id"] = row.query_id;
  j["model_id"] = row.model_id;
  j["k_requested"] = row.k_requested;
  j["shots"] = row.shots;
  j["status"] = row.status;
  j["ngram"] = row.ngram;
  j["weighted_ngram"] = row.weighted_ngram;
  j["syntax"] = row.syntax;
  if (row.dataflow.has_value())
    j["dataflow"] = *row.dataflow;
  else
    j["dataflow"] = nullptr;
  j["combined"] = row.combined;
  if (row.shot_similarity.has_value()) j["shot_similarity"] = *row.shot_similarity;
  if (row.shot_combined.has_value()) j["shot_combined"] = *row.shot_combined;
  return j.dump();
}

ScoreRow score_row_from_json_line(const std::string& line) {
  const json j = json::parse(line, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded() || !j.is_object()) throw ParseError("malformed score row");
  try {
    ScoreRow row;
    row.query_id = j.at("query_id").get<std::string>();
    row.model_id = j.at("model_id").get<std::string>();
    row.k_requested = j.value("k_requested", 0);
    row.shots = j.value("shots", 0);
    row.status = j.value("status", std::string("ok"));
    row.ngram = j.value("ngram", 0.0);
    row.weighted_ngram = j.value("weighted_ngram", 0.0);
    row.syntax = j.value("syntax", 0.0);
    if (j.contains("dataflow") && !j["dataflow"].is_null())
      row.dataflow = j["dataflow"].get<double>();
    row.combined = j.value("combined", 0.0);
    if (j.contains("shot_similarity") && !j["shot_similarity"].is_null())
      row.shot_similarity = j["shot_similarity"].get<double>();
    if (j.contains("shot_combined") && !j["shot_combined"].is_null())
      row.shot_combined = j["shot_combined"].get<double>();
    return row;
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed score row: ") + e.what());
  }
}

std::vector<ScoreRow> score_results(const std::vector<TranslationResult>& results,
                                    const Dataset& references,
                                    const std::array<double, 4>& weights,
                                    double kw_weight) {
  std::map<std::string, const CodePair*> by_id;
  for (const CodePair& p : references.pairs) by_id[p.id] = &p;

  std::vector<ScoreRow> out;
  out.reserve(results.size());
  for (const TranslationResult& r : results) {
    ScoreRow row;
    row.query_id = r.query_id;
    row.model_id = r.model_id;
    row.k_requested = r.k_requested;
    row.shots = r.shots;
    row.status = to_string(r.status);
    if (!r.shot_scores.empty()) row.shot_similarity = r.shot_scores.front();

    if (r.status == TranslationStatus::Ok) {
      const auto it = by_id.find(r.query_id);
      const bool has_ref = it != by_id.end() && !it->second->cpp.empty();
      if (!has_ref) {
        row.status = "no_reference";
      } else {
        const CodeBleuScore s =
            codebleu(r.candidate_cpp, it->second->cpp, weights, kw_weight);
        row.ngram = s.ngram;
        row.weighted_ngram = s.weighted_ngram;
        row.syntax = s.syntax;
        row.dataflow = s.dataflow;
        row.combined = s.combined;
      }
      if (!r.example_ids.empty()) {
        const auto shot = by_id.find(r.example_ids.front());
        if (shot != by_id.end() && !shot->second->cpp.empty()) {
          row.shot_combined =
              codebleu(r.candidate_cpp, shot->second->cpp, weights, kw_weight)
                  .combined;
        }
      }
    }
    out.push_back(std::move(row));
  }
  return out;
}

std::vector<ScoreRow> load_scores(const std::string& path) {
  const std::string text = detail::read_file(path);
  std::vector<ScoreRow> out;
  int line_no = 0;
  for (const std::string& line : split_lines(text)) {
    ++line_no;
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    try {
      out.push_back(score_row_from_json_line(line));
    } catch (const Error& e) {
      throw ParseError(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

std::vector<ScatterPoint> scatter_data(const std::vector<ScoreRow>& rows) {
  std::vector<ScatterPoint> points;
  for (const ScoreRow& row : rows) {
    if (row.k_requested < 1 || row.status != "ok" || !row.shot_similarity.has_value())
      continue;
    ScatterPoint p;
    p.query_id = row.query_id;
    p.model_id = row.model_id;
    p.k = row.k_requested;
    p.shot_similarity = *row.shot_similarity;
    p.codebleu_combined = row.combined;
    points.push_back(std::move(p));
  }
  return points;
}

std::string scatter_csv(const std::vector<ScatterPoint>& points) {
  std::string out = "query_id,model_id,k,shot_similarity,codebleu_combined\n";
  for (const ScatterPoint& p : points) {
    out += csv_escape(p.query_id) + "," + csv_escape(p.model_id) + "," +
           std::to_string(p.k) + "," + fmt17(p.shot_similarity) + "," +
           fmt17(p.codebleu_combined) + "\n";
  }
  return out;
}

std::string matrix_csv(const Matrix& m, const std::vector<std::string>& labels) {
  if (labels.size() != m.n)
    throw ArgumentError("matrix_csv: label count does not match matrix size");
  std::string out = "label";
  for (const std::string& label : labels) out += "," + csv_escape(label);
  out += '\n';
  for (std::size_t i = 0; i < m.n; ++i) {
    out += csv_escape(labels[i]);
    for (std::size_t j = 0; j < m.n; ++j) out += "," + fmt17(m.at(i, j));
    out += '\n';
  }
  return out;
}

Matrix load_matrix_csv(const std::string& path, std::vector<std::string>* labels) {
  const std::vector<std::string> lines = split_lines(detail::read_file(path));
  if (lines.empty()) throw ParseError("empty matrix file: " + path);

  const std::vector<std::string> header = split_csv_line(lines[0]);
  if (header.size() < 2)
    throw ParseError("matrix header needs at least one label: " + path);
  const std::size_t n = header.size() - 1;

  Matrix m;
  m.n = n;
  m.cells.assign(n * n, 0.0);
  std::vector<std::string> row_labels;
  std::size_t row = 0;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    if (lines[li].empty()) continue;
    if (row >= n) throw ParseError("matrix has more rows than labels: " + path);
    const std::vector<std::string> fields = split_csv_line(lines[li]);
    if (fields.size() != n + 1)
      throw ParseError(path + ":" + std::to_string(li + 1) + ": expected " +
                       std::to_string(n + 1) + " fields, got " +
                       std::to_string(fields.size()));
    row_labels.push_back(fields[0]);
    for (std::size_t j = 0; j < n; ++j) {
      try {
        m.cells[row * n + j] = std::stod(fields[j + 1]);
      } catch (const std::exception&) {
        throw ParseError(path + ":" + std::to_string(li + 1) +
                         ": non-numeric cell '" + fields[j + 1] + "'");
      }
    }
    ++row;
  }
  if (row != n) throw ParseError("matrix has fewer rows than labels: " + path);
  if (labels != nullptr) *labels = std::move(row_labels);
  return m;
}

namespace {

std::string xml_escape(const std::string& s) {
  std::string out;
  for (const char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

// white at the minimum value, deep blue (#0d47a1) at the maximum
std::string heat_color(double value, double lo, double hi) {
  double t = hi > lo ? (value - lo) / (hi - lo) : 1.0;
  t = std::clamp(t, 0.0, 1.0);
  const int r = static_cast<int>(std::lround(255.0 + (13.0 - 255.0) * t));
  const int g = static_cast<int>(std::lround(255.0 + (71.0 - 255.0) * t));
  const int b = static_cast<int>(std::lround(255.0 + (161.0 - 255.0) * t));
  char buf[8];
  std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", r, g, b);
  return buf;
}

}  // namespace

void render_heatmap(const Matrix& m, const std::vector<std::string>& labels,
                    const std::string& svg_path, const std::string& csv_path,
                    const std::string& title) {
  if (labels.size() != m.n)
    throw ArgumentError("render_heatmap: label count does not match matrix size");
  if (m.n == 0) throw ArgumentError("render_heatmap: empty matrix");

  if (!csv_path.empty()) detail::write_file_atomic(csv_path, matrix_csv(m, labels));

  double lo = m.cells[0];
  double hi = m.cells[0];
  for (const double v : m.cells) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }

  const int cell = 56;
  const int margin_left = 120;
  const int margin_top = title.empty() ? 96 : 128;
  const int n = static_cast<int>(m.n);
  const int width = margin_left + n * cell + 16;
  const int height = margin_top + n * cell + 16;

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
         std::to_string(width) + "\" height=\"" + std::to_string(height) +
         "\" viewBox=\"0 0 " + std::to_string(width) + " " +
         std::to_string(height) + "\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg +=
      "<style>text{font-family:monospace;font-size:12px;fill:#222}"
      ".t{font-size:14px;font-weight:bold}</style>\n";
  if (!title.empty()) {
    svg += "<text class=\"t\" x=\"" + std::to_string(margin_left) +
           "\" y=\"24\">" + xml_escape(title) + "</text>\n";
  }

  for (int j = 0; j < n; ++j) {
    const int x = margin_left + j * cell + cell / 2;
    // column labels, rotated to survive long model ids
    svg += "<text x=\"" + std::to_string(x) + "\" y=\"" +
           std::to_string(margin_top - 8) + "\" text-anchor=\"start\" transform=\"rotate(-45 " +
           std::to_string(x) + " " + std::to_string(margin_top - 8) + ")\">" +
           xml_escape(labels[j]) + "</text>\n";
  }
  for (int i = 0; i < n; ++i) {
    const int y = margin_top + i * cell + cell / 2 + 4;
    svg += "<text x=\"" + std::to_string(margin_left - 8) + "\" y=\"" +
           std::to_string(y) + "\" text-anchor=\"end\">" + xml_escape(labels[i]) +
           "</text>\n";
  }

  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double v = m.at(i, j);
      const int x = margin_left + j * cell;
      const int y = margin_top + i * cell;
      svg += "<rect x=\"" + std::to_string(x) + "\" y=\"" + std::to_string(y) +
             "\" width=\"" + std::to_string(cell) + "\" height=\"" +
             std::to_string(cell) + "\" fill=\"" + heat_color(v, lo, hi) +
             "\" stroke=\"#ccc\"/>\n";
      // annotation flips to white on the darker half of the scale
      const bool dark = hi > lo && (v - lo) / (hi - lo) > 0.55;
      svg += "<text x=\"" + std::to_string(x + cell / 2) + "\" y=\"" +
             std::to_string(y + cell / 2 + 4) + "\" text-anchor=\"middle\"" +
             (dark ? " fill=\"white\" style=\"fill:white\"" : "") + ">" +
             printf_format("%.2f", v) + "</text>\n";
    }
  }
  svg += "</svg>\n";
  detail::write_file_atomic(svg_path, svg);
}

}  // namespace ragxlate
