#pragma once

#include <cstddef>
#include <string>
#include <unordered_set>
#include <vector>

namespace ragxlate {

enum class TokenKind { Keyword, Identifier, Number, String, Operator, Punct };

struct Token {
  std::string text;
  TokenKind kind = TokenKind::Operator;
  int line = 0;          // 0-based line the token starts on
  std::size_t begin = 0; // byte offset of the first character
  std::size_t end = 0;   // byte offset one past the last character

  bool operator==(const Token&) const = default;
};

// The shipped C++ keyword set (C++20). data/cpp_keywords.txt mirrors this
// list; a unit test keeps the two in sync.
const std::unordered_set<std::string>& default_cpp_keywords();

// Parse a keyword data file: '#'-prefixed lines and blank lines are ignored,
// every other (trimmed) line is one keyword.
std::unordered_set<std::string> load_keywords(const std::string& path);

// Total, deterministic lexer shared by the metric, the local embedder and the
// prompt token estimator. Splits on whitespace and punctuation; string/char
// literals and numbers are single tokens; identifiers are classified against
// `keywords`. Never throws: unknown bytes come back as Operator tokens.
std::vector<Token> tokenize(const std::string& code,
                            const std::unordered_set<std::string>& keywords =
                                default_cpp_keywords());

}  // namespace ragxlate
