#include "ragxlate/codebleu.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "ragxlate/corpus.hpp"
#include "ragxlate/errors.hpp"

namespace ragxlate {

namespace {

// --- shared n-gram machinery -------------------------------------------------

struct GramInfo {
  int count = 0;       // occurrences in the candidate
  int ref_count = 0;   // occurrences in the reference
  bool has_keyword = false;
};

// Key n-grams by their texts joined with an unprintable separator; record
// whether any member token is a keyword (identical texts imply identical
// kinds, so the flag is consistent between candidate and reference).
std::map<std::string, GramInfo> collect_grams(const std::vector<Token>& cand,
                                              const std::vector<Token>& ref,
                                              int n) {
  std::map<std::string, GramInfo> grams;
  auto key_at = [n](const std::vector<Token>& toks, std::size_t i,
                    bool* has_kw) {
    std::string key;
    bool kw = false;
    for (int j = 0; j < n; ++j) {
      if (j > 0) key += '\x1f';
      key += toks[i + j].text;
      kw = kw || toks[i + j].kind == TokenKind::Keyword;
    }
    *has_kw = kw;
    return key;
  };
  if (cand.size() >= static_cast<std::size_t>(n)) {
    for (std::size_t i = 0; i + n <= cand.size(); ++i) {
      bool kw = false;
      auto key = key_at(cand, i, &kw);
      auto& info = grams[key];
      info.count += 1;
      info.has_keyword = kw;
    }
  }
  if (ref.size() >= static_cast<std::size_t>(n)) {
    for (std::size_t i = 0; i + n <= ref.size(); ++i) {
      bool kw = false;
      auto key = key_at(ref, i, &kw);
      auto& info = grams[key];
      info.ref_count += 1;
      info.has_keyword = kw;
    }
  }
  return grams;
}

// Clipped modified precision for one n, with every n-gram contributing
// weight kw_weight when it contains a keyword, else 1. Zero-match precisions
// are smoothed to 1/(2 * c_n) with the raw candidate n-gram count. Returns
// false when the candidate has no n-grams of this order.
bool precision_at(const std::vector<Token>& cand, const std::vector<Token>& ref,
                  int n, double kw_weight, double* out) {
  if (cand.size() < static_cast<std::size_t>(n)) return false;
  const auto grams = collect_grams(cand, ref, n);

  const double c_n = static_cast<double>(cand.size() - n + 1);
  double numer = 0.0;
  double denom = 0.0;
  for (const auto& [key, info] : grams) {
    if (info.count == 0) continue;
    const double w = info.has_keyword ? kw_weight : 1.0;
    denom += w * info.count;
    numer += w * std::min(info.count, info.ref_count);
  }
  *out = numer > 0.0 ? numer / denom : 1.0 / (2.0 * c_n);
  return true;
}

double bleu_core(const std::vector<Token>& cand, const std::vector<Token>& ref,
                 int max_n, double kw_weight) {
  if (max_n < 1) throw ArgumentError("ngram match: max_n must be >= 1");
  if (cand.empty()) return ref.empty() ? 1.0 : 0.0;

  double product = 1.0;
  int available = 0;
  for (int n = 1; n <= max_n; ++n) {
    double p = 0.0;
    if (!precision_at(cand, ref, n, kw_weight, &p)) break;  // shorter than n
    product *= p;
    ++available;
  }
  // cand is non-empty, so n = 1 always contributes.
  const double geo = std::pow(product, 1.0 / static_cast<double>(available));

  const double c = static_cast<double>(cand.size());
  const double r = static_cast<double>(ref.size());
  const double bp = c >= r ? 1.0 : std::exp(1.0 - r / c);
  return bp * geo;
}

// --- structural tree ----------------------------------------------------------

std::string abstract_text(const Token& t) {
  switch (t.kind) {
    case TokenKind::Identifier:
      return "IDENT";
    case TokenKind::Number:
      return "NUM";
    case TokenKind::String:
      return "STR";
    default:
      return t.text;
  }
}

void collect_subtrees(const StructNode& node, std::map<std::string, int>& out) {
  for (const StructNode& child : node.children) {
    out[serialize_subtree(child)] += 1;
    collect_subtrees(child, out);
  }
}

}  // namespace

double ngram_match(const std::vector<Token>& candidate,
                   const std::vector<Token>& reference, int max_n) {
  return bleu_core(candidate, reference, max_n, /*kw_weight=*/1.0);
}

double weighted_ngram_match(const std::vector<Token>& candidate,
                            const std::vector<Token>& reference, int max_n,
                            double kw_weight) {
  if (kw_weight < 1.0)
    throw ArgumentError("weighted_ngram_match: kw_weight must be >= 1");
  return bleu_core(candidate, reference, max_n, kw_weight);
}

StructTree parse_struct(const std::string& code) {
  const std::vector<Token> tokens = tokenize(code);

  StructTree tree;
  tree.root.label = "root";
  std::vector<StructNode*> stack{&tree.root};
  std::vector<std::string> buf;

  auto flush = [&] {
    if (buf.empty()) return;
    StructNode leaf;
    leaf.leaf = true;
    for (std::size_t i = 0; i < buf.size(); ++i) {
      if (i > 0) leaf.label += ' ';
      leaf.label += buf[i];
    }
    stack.back()->children.push_back(std::move(leaf));
    buf.clear();
  };
  auto open_group = [&](const char* label) {
    flush();
    stack.back()->children.push_back(StructNode{label, {}, false});
    stack.push_back(&stack.back()->children.back());
  };
  auto close_group = [&](const char* label) {
    flush();
    if (stack.size() > 1 && stack.back()->label == label) {
      stack.pop_back();
    } else {
      tree.repairs += 1;  // stray or mismatched closer: ignored
    }
  };

  for (const Token& t : tokens) {
    if (t.kind == TokenKind::Punct && t.text.size() == 1) {
      switch (t.text[0]) {
        case '(':
          open_group("paren");
          continue;
        case '{':
          open_group("brace");
          continue;
        case '[':
          open_group("bracket");
          continue;
        case ')':
          close_group("paren");
          continue;
        case '}':
          close_group("brace");
          continue;
        case ']':
          close_group("bracket");
          continue;
        case ';':
          buf.push_back(";");
          flush();
          continue;
        default:
          break;
      }
    }
    buf.push_back(abstract_text(t));
  }
  flush();
  tree.repairs += static_cast<int>(stack.size()) - 1;  // auto-close at EOI
  return tree;
}

std::string serialize_subtree(const StructNode& node) {
  if (node.leaf) return "{" + node.label + "}";
  std::string s = "(" + node.label;
  for (const StructNode& child : node.children) {
    s += ' ';
    s += serialize_subtree(child);
  }
  s += ')';
  return s;
}

double syntax_match(const StructTree& candidate, const StructTree& reference) {
  std::map<std::string, int> cand_ms;
  std::map<std::string, int> ref_ms;
  collect_subtrees(candidate.root, cand_ms);
  collect_subtrees(reference.root, ref_ms);

  long long ref_total = 0;
  for (const auto& [key, count] : ref_ms) ref_total += count;
  if (ref_total == 0) return cand_ms.empty() ? 1.0 : 0.0;

  long long matched = 0;
  for (const auto& [key, count] : ref_ms) {
    const auto it = cand_ms.find(key);
    if (it != cand_ms.end()) matched += std::min(count, it->second);
  }
  return static_cast<double>(matched) / static_cast<double>(ref_total);
}

std::vector<DataflowEdge> extract_dataflow(const std::string& code) {
  const std::vector<Token> tokens = tokenize(code);

  // var_i assignment by first appearance over the whole identifier stream
  std::map<std::string, std::string> norm;
  int next_var = 0;
  for (const Token& t : tokens) {
    if (t.kind != TokenKind::Identifier) continue;
    if (norm.emplace(t.text, "var_" + std::to_string(next_var)).second)
      ++next_var;
  }

  // statement splitting: ';' '{' '}' at paren/bracket depth 0, plus depth-0
  // line breaks (multi-line argument lists stay intact)
  std::vector<std::vector<const Token*>> stmts;
  std::vector<const Token*> current;
  auto close_stmt = [&] {
    if (!current.empty()) stmts.push_back(std::move(current));
    current.clear();
  };

  int depth = 0;
  int cur_line = tokens.empty() ? 0 : tokens.front().line;
  for (const Token& t : tokens) {
    if (depth == 0) {
      if (t.line != cur_line) close_stmt();
      cur_line = t.line;
    }
    if (t.kind == TokenKind::Punct && t.text.size() == 1) {
      const char c = t.text[0];
      if (c == '(' || c == '[') {
        ++depth;
        current.push_back(&t);
        continue;
      }
      if (c == ')' || c == ']') {
        depth = std::max(0, depth - 1);
        current.push_back(&t);
        continue;
      }
      if (depth == 0 && (c == ';' || c == '{' || c == '}')) {
        close_stmt();
        continue;
      }
    }
    current.push_back(&t);
  }
  close_stmt();

  std::vector<DataflowEdge> edges;
  for (const auto& stmt : stmts) {
    // first '=' outside parentheses/brackets; compound assignment and
    // comparison operators are distinct tokens and never match "="
    int eq = -1;
    int d = 0;
    for (std::size_t i = 0; i < stmt.size(); ++i) {
      const Token& t = *stmt[i];
      if (t.kind == TokenKind::Punct && t.text.size() == 1) {
        if (t.text[0] == '(' || t.text[0] == '[') ++d;
        if (t.text[0] == ')' || t.text[0] == ']') d = std::max(0, d - 1);
      }
      if (d == 0 && t.kind == TokenKind::Operator && t.text == "=") {
        eq = static_cast<int>(i);
        break;
      }
    }
    if (eq < 0) continue;

    const std::string* def = nullptr;
    for (int i = eq - 1; i >= 0; --i) {
      if (stmt[i]->kind == TokenKind::Identifier) {
        def = &norm.at(stmt[i]->text);
        break;
      }
    }
    if (def == nullptr) continue;

    for (std::size_t i = eq + 1; i < stmt.size(); ++i) {
      if (stmt[i]->kind == TokenKind::Identifier)
        edges.push_back(DataflowEdge{*def, norm.at(stmt[i]->text)});
    }
  }
  std::sort(edges.begin(), edges.end());
  return edges;
}

std::optional<double> dataflow_match(const std::vector<DataflowEdge>& candidate,
                                     const std::vector<DataflowEdge>& reference) {
  if (reference.empty()) return std::nullopt;
  // both inputs arrive sorted (extract_dataflow's contract)
  std::vector<DataflowEdge> both;
  std::set_intersection(candidate.begin(), candidate.end(), reference.begin(),
                        reference.end(), std::back_inserter(both));
  return static_cast<double>(both.size()) / static_cast<double>(reference.size());
}

CodeBleuScore codebleu(const std::string& candidate, const std::string& reference,
                       const std::array<double, 4>& weights, double kw_weight) {
  double wsum = 0.0;
  for (const double w : weights) {
    if (w < 0.0) throw ArgumentError("codebleu: weights must be non-negative");
    wsum += w;
  }
  if (wsum <= 0.0) throw ArgumentError("codebleu: weights must not all be zero");

  const std::string cand = normalize_code_lenient(candidate, Lang::Cpp);
  const std::string ref = normalize_code_lenient(reference, Lang::Cpp);
  const std::vector<Token> cand_tokens = tokenize(cand);
  const std::vector<Token> ref_tokens = tokenize(ref);

  CodeBleuScore s;
  s.weights = weights;
  s.ngram = ngram_match(cand_tokens, ref_tokens);
  s.weighted_ngram = weighted_ngram_match(cand_tokens, ref_tokens, 4, kw_weight);
  s.syntax = syntax_match(parse_struct(cand), parse_struct(ref));
  s.dataflow = dataflow_match(extract_dataflow(cand), extract_dataflow(ref));

  if (s.dataflow.has_value()) {
    s.combined = (weights[0] * s.ngram + weights[1] * s.weighted_ngram +
                  weights[2] * s.syntax + weights[3] * *s.dataflow) /
                 wsum;
  } else {
    const double w3 = weights[0] + weights[1] + weights[2];
    // all weight on the absent component: nothing left to score
    s.combined = w3 > 0.0 ? (weights[0] * s.ngram + weights[1] * s.weighted_ngram +
                             weights[2] * s.syntax) /
                                w3
                          : 0.0;
  }
  return s;
}

}  // namespace ragxlate
