#pragma once

#include <string>
#include <vector>

#include "ragxlate/corpus.hpp"
#include "ragxlate/vectorstore.hpp"

namespace ragxlate {

// System message sent with every translation request (verbatim, no trailing
// newline).
inline constexpr const char* kSystemLine =
    "You are adept at translating Fortran code into CPP with high accuracy, "
    "ensuring that all syntax, semantics, and specific language features are "
    "correctly and efficiently converted";

struct Prompt {
  std::string system;
  std::string user;
  int shots = 0;  // examples actually included (== example_ids.size())
  std::vector<std::string> example_ids;  // most-similar-first
  int est_tokens = 0;  // conservative whole-prompt estimate, see estimate_tokens
};

// Conservative proxy for a model tokenizer: lexer token count x 1.3, rounded
// up (integer arithmetic, so the estimate is platform-independent).
int estimate_tokens(const std::string& text);

// user = "Translate the following code from Fortran to CPP:\n{fortran}".
// Pure: identical inputs yield identical bytes. ArgumentError on an empty
// query snippet.
Prompt build_zero_shot(const CodePair& query);

// user = one block per example, most-similar-first:
//   "Here's an example of a code translated from Fortran to CPP:\n"
//   "Here's the Fortran code:\n{S_i}\n"
//   "Here's the CPP translation:\n{T_i}\n"
// followed by
//   "Now translate the following code from Fortran to CPP:\n{query.fortran}".
//
// `examples` must be ranked and self-excluded (ArgumentError if any example
// id equals query.id). If the token estimate exceeds max_context_tokens,
// examples are dropped from the tail (least similar first) until it fits;
// `shots` reflects what was actually included. ContextOverflowError when the
// bare query does not fit. Note: with zero examples the user text keeps the
// "Now translate" lead-in; the pipeline uses build_zero_shot for k = 0.
Prompt build_few_shot(const CodePair& query,
                      const std::vector<RetrievedExample>& examples,
                      int max_context_tokens);

}  // namespace ragxlate
