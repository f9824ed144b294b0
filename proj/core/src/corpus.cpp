#include "ragxlate/corpus.hpp"

#include <fstream>
#include <unordered_set>
#include <utility>

#include <json.hpp>

#include "io_util.hpp"
#include "ragxlate/errors.hpp"

namespace ragxlate {

namespace {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

// Free-form `!` comments are stripped quote-aware (a bang inside a character
// literal survives); fixed-form comment lines (column-1 C/c/*) are dropped
// whole. Quote state resets at each newline — Fortran literals do not span
// lines — which also keeps the pass idempotent on its own output.
std::string strip_fortran_comments(const std::string& code) {
  std::string out;
  out.reserve(code.size());
  std::size_t i = 0;
  const std::size_t n = code.size();
  while (i < n) {
    const char first = code[i];
    if (first == 'C' || first == 'c' || first == '*') {
      while (i < n && code[i] != '\n') ++i;
      if (i < n) ++i;  // swallow the newline too
      continue;
    }
    char quote = 0;
    while (i < n && code[i] != '\n') {
      const char c = code[i];
      if (quote != 0) {
        out += c;
        ++i;
        if (c == quote) quote = 0;  // doubled quotes close and reopen — fine
      } else if (c == '\'' || c == '"') {
        quote = c;
        out += c;
        ++i;
      } else if (c == '!') {
        while (i < n && code[i] != '\n') ++i;
      } else {
        out += c;
        ++i;
      }
    }
    if (i < n) {
      out += '\n';
      ++i;
    }
  }
  return out;
}

// `//` and `/* ... */` removed string-aware. A block comment disappears
// entirely (its newlines included). `lenient` turns an unterminated `/*`
// into a comment running to the end of input instead of an error.
std::string strip_cpp_comments(const std::string& code, bool lenient) {
  std::string out;
  out.reserve(code.size());
  std::size_t i = 0;
  const std::size_t n = code.size();
  char quote = 0;
  while (i < n) {
    const char c = code[i];
    if (quote != 0) {
      out += c;
      if (c == '\\' && i + 1 < n && code[i + 1] != '\n') {
        out += code[i + 1];
        i += 2;
        continue;
      }
      if (c == quote || c == '\n') quote = 0;  // literals end at EOL at worst
      ++i;
      continue;
    }
    if (c == '"' || c == '\'') {
      quote = c;
      out += c;
      ++i;
      continue;
    }
    if (c == '/' && i + 1 < n && code[i + 1] == '/') {
      while (i < n && code[i] != '\n') ++i;
      continue;
    }
    if (c == '/' && i + 1 < n && code[i + 1] == '*') {
      const std::size_t close = code.find("*/", i + 2);
      if (close == std::string::npos) {
        if (!lenient)
          throw NormalizationError("unterminated /* block comment");
        i = n;
        continue;
      }
      i = close + 2;
      continue;
    }
    out += c;
    ++i;
  }
  return out;
}

// Tabs to 4 spaces, per-line trailing whitespace trimmed, runs of blank
// lines collapsed to a single one. Preserves whether the text ended with a
// newline.
std::string tidy_whitespace(const std::string& text) {
  const bool trailing_nl = !text.empty() && text.back() == '\n';

  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t nl = text.find('\n', start);
    if (nl == std::string::npos) {
      lines.push_back(text.substr(start));
      break;
    }
    lines.push_back(text.substr(start, nl - start));
    start = nl + 1;
  }
  if (trailing_nl && !lines.empty() && lines.back().empty()) lines.pop_back();

  std::vector<std::string> kept;
  kept.reserve(lines.size());
  bool prev_blank = false;
  for (const std::string& raw : lines) {
    std::string line;
    line.reserve(raw.size());
    for (const char c : raw) {
      if (c == '\t') {
        line += "    ";
      } else {
        line += c;
      }
    }
    while (!line.empty() &&
           (line.back() == ' ' || line.back() == '\t' || line.back() == '\r'))
      line.pop_back();
    const bool blank = line.empty();
    if (blank && prev_blank) continue;
    kept.push_back(std::move(line));
    prev_blank = blank;
  }

  std::string out;
  for (std::size_t i = 0; i < kept.size(); ++i) {
    if (i > 0) out += '\n';
    out += kept[i];
  }
  if (trailing_nl && !out.empty()) out += '\n';
  return out;
}

std::string normalize_impl(const std::string& code, Lang lang, bool lenient) {
  const std::string stripped = lang == Lang::Fortran
                                   ? strip_fortran_comments(code)
                                   : strip_cpp_comments(code, lenient);
  return tidy_whitespace(stripped);
}

}  // namespace

std::string normalize_code(const std::string& code, Lang lang) {
  return normalize_impl(code, lang, /*lenient=*/false);
}

std::string normalize_code_lenient(const std::string& code, Lang lang) {
  return normalize_impl(code, lang, /*lenient=*/true);
}

Dataset load_dataset(const std::string& path, const std::string& name) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ArgumentError("cannot open dataset file: " + path);

  Dataset ds;
  ds.name = name;
  ds.labeled = true;

  std::unordered_set<std::string> seen;
  std::string line;
  int line_no = 0;
  auto where = [&]() { return path + ":" + std::to_string(line_no); };

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    bool blank = true;
    for (const char c : line) {
      if (c != ' ' && c != '\t') {
        blank = false;
        break;
      }
    }
    if (blank) continue;

    const json j = json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded() || !j.is_object())
      throw ParseError(where() + ": malformed JSON line");
    if (!j.contains("id") || !j["id"].is_string())
      throw ParseError(where() + ": missing or non-string 'id'");
    if (!j.contains("fortran") || !j["fortran"].is_string())
      throw ParseError(where() + ": missing or non-string 'fortran'");
    if (j.contains("cpp") && !j["cpp"].is_string())
      throw ParseError(where() + ": non-string 'cpp'");

    CodePair p;
    p.id = j["id"].get<std::string>();
    p.dataset = name;
    try {
      p.fortran = normalize_code(j["fortran"].get<std::string>(), Lang::Fortran);
      p.cpp = j.contains("cpp")
                  ? normalize_code(j["cpp"].get<std::string>(), Lang::Cpp)
                  : std::string{};
    } catch (const NormalizationError& e) {
      throw NormalizationError(where() + ": " + e.what());
    }
    p.byte_len = p.fortran.size();

    if (p.fortran.empty())
      throw IntegrityError(where() + ": record '" + p.id +
                           "' is empty after normalization");
    if (!seen.insert(p.id).second)
      throw IntegrityError(where() + ": duplicate id '" + p.id + "'");
    if (p.cpp.empty()) ds.labeled = false;
    ds.pairs.push_back(std::move(p));
  }
  return ds;
}

void save_dataset(const Dataset& ds, const std::string& path) {
  std::string out;
  for (const CodePair& p : ds.pairs) {
    ordered_json j;
    j["id"] = p.id;
    j["fortran"] = p.fortran;
    if (!p.cpp.empty()) j["cpp"] = p.cpp;
    out += j.dump();
    out += '\n';
  }
  detail::write_file_atomic(path, out);
}

Dataset filter_by_size(const Dataset& ds, std::size_t min_bytes,
                       std::size_t max_bytes) {
  if (min_bytes > max_bytes)
    throw ArgumentError("filter_by_size: min_bytes (" +
                        std::to_string(min_bytes) + ") > max_bytes (" +
                        std::to_string(max_bytes) + ")");
  Dataset out;
  out.name = ds.name;
  out.labeled = true;
  for (const CodePair& p : ds.pairs) {
    if (p.byte_len < min_bytes || p.byte_len > max_bytes) continue;
    if (p.cpp.empty()) out.labeled = false;
    out.pairs.push_back(p);
  }
  return out;
}

}  // namespace ragxlate
