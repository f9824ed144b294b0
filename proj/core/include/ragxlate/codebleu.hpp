#pragma once

#include <array>
#include <compare>
#include <optional>
#include <string>
#include <vector>

#include "ragxlate/tokenizer.hpp"

namespace ragxlate {

// --- structural surrogate tree ---------------------------------------------

// Lightweight bracket-nesting tree: groups ("paren"/"brace"/"bracket") become
// interior nodes; runs of other tokens become statement leaves, terminated by
// `;` (which is kept in the leaf label), by group boundaries, or by
// end-of-input. Leaf labels abstract identifiers to IDENT, numbers to NUM and
// strings to STR, so structure survives renaming.
struct StructNode {
  std::string label;
  std::vector<StructNode> children;
  bool leaf = false;
};

struct StructTree {
  StructNode root;  // label "root"; never counted as a subtree itself
  int repairs = 0;  // stray closers plus groups auto-closed at end-of-input
};

// --- dataflow ---------------------------------------------------------------

struct DataflowEdge {
  std::string def_var;  // normalized name: var_0, var_1, ... by first appearance
  std::string use_var;

  auto operator<=>(const DataflowEdge&) const = default;
};

// --- scores ------------------------------------------------------------------

struct CodeBleuScore {
  double ngram = 0.0;
  double weighted_ngram = 0.0;
  double syntax = 0.0;
  std::optional<double> dataflow;  // absent when the reference has no edges
  double combined = 0.0;
  std::array<double, 4> weights{0.25, 0.25, 0.25, 0.25};
};

inline constexpr std::array<double, 4> kDefaultWeights{0.25, 0.25, 0.25, 0.25};
inline constexpr double kDefaultKeywordWeight = 4.0;

// BLEU-style clipped modified n-gram precision over token texts, n = 1..max_n.
// Any n with zero matches but a non-empty candidate n-gram bag is smoothed to
// 1/(2*c_n). Score = BP * geometric mean of the available precisions, where
// BP = 1 if the candidate is at least as long as the reference, else
// exp(1 - r/c). Empty candidate scores 0 (1 when the reference is empty too).
double ngram_match(const std::vector<Token>& candidate,
                   const std::vector<Token>& reference, int max_n = 4);

// Same scheme, but every n-gram containing at least one Keyword token weighs
// kw_weight instead of 1 in both the matched and the total counts. The
// smoothing fallback uses the raw (unweighted) candidate n-gram count, so
// kw_weight = 1 reproduces ngram_match exactly.
double weighted_ngram_match(const std::vector<Token>& candidate,
                            const std::vector<Token>& reference, int max_n = 4,
                            double kw_weight = kDefaultKeywordWeight);

// Total on malformed input: stray closers are ignored and open groups are
// closed at end-of-input, both counted in StructTree::repairs.
StructTree parse_struct(const std::string& code);

// Multiset match over the canonical serializations of every node-rooted full
// subtree, root excluded: |cand multiset intersect ref multiset| / |ref|.
// A reference with zero subtrees scores 1 against an equally empty candidate,
// else 0.
double syntax_match(const StructTree& candidate, const StructTree& reference);

// Canonical serialization of one node-rooted subtree (exposed for tests).
std::string serialize_subtree(const StructNode& node);

// Heuristic def-use extraction: statements are delimited by `;`, `{`, `}`
// and depth-0 line breaks; a statement with a top-level `=` (outside any
// parentheses/brackets; compound operators like == or += are distinct tokens
// and never match) is an assignment. The def is the last identifier on the
// left of the `=`; every identifier on the right is a use. Identifiers are
// normalized to var_i by first appearance over the whole snippet, so the
// result is invariant under consistent renaming. Returned sorted (multiset).
std::vector<DataflowEdge> extract_dataflow(const std::string& code);

// Multiset intersection ratio |cand ∩ ref| / |ref|; std::nullopt when the
// reference has no edges (the combination renormalizes in that case).
std::optional<double> dataflow_match(const std::vector<DataflowEdge>& candidate,
                                     const std::vector<DataflowEdge>& reference);

// Runs all four components on leniently normalized C++ text and combines
// them: combined = a*ngram + b*weighted + c*syntax + d*dataflow, with weights
// renormalized over the present components when dataflow is absent.
// Weights must be non-negative with a positive sum (ArgumentError otherwise).
CodeBleuScore codebleu(const std::string& candidate,
                       const std::string& reference,
                       const std::array<double, 4>& weights = kDefaultWeights,
                       double kw_weight = kDefaultKeywordWeight);

}  // namespace ragxlate
