#include "ragxlate/tokenizer.hpp"

#include <cstring>
#include <fstream>

#include "ragxlate/errors.hpp"

namespace ragxlate {

namespace {

bool is_ident_start(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
}

bool is_ident_char(char c) {
  return is_ident_start(c) || (c >= '0' && c <= '9');
}

bool is_digit(char c) { return c >= '0' && c <= '9'; }

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\r' || c == '\v' || c == '\f';
}

// Longest first, so maximal munch falls out of a linear scan.
constexpr const char* kCompoundOps[] = {
    "<<=", ">>=", "<=>", "->*", "...", "::", "->", "++", "--", "<<", ">>",
    "<=",  ">=",  "==",  "!=",  "&&",  "||", "+=", "-=", "*=", "/=", "%=",
    "&=",  "|=",  "^=",  ".*",
};

}  // namespace

const std::unordered_set<std::string>& default_cpp_keywords() {
  static const std::unordered_set<std::string> kKeywords = {
      "alignas",      "alignof",      "and",           "and_eq",
      "asm",          "auto",         "bitand",        "bitor",
      "bool",         "break",        "case",          "catch",
      "char",         "char8_t",      "char16_t",      "char32_t",
      "class",        "compl",        "concept",       "const",
      "consteval",    "constexpr",    "constinit",     "const_cast",
      "continue",     "co_await",     "co_return",     "co_yield",
      "decltype",     "default",      "delete",        "do",
      "double",       "dynamic_cast", "else",          "enum",
      "explicit",     "export",       "extern",        "false",
      "float",        "for",          "friend",        "goto",
      "if",           "inline",       "int",           "long",
      "mutable",      "namespace",    "new",           "noexcept",
      "not",          "not_eq",       "nullptr",       "operator",
      "or",           "or_eq",        "private",       "protected",
      "public",       "register",     "reinterpret_cast", "requires",
      "return",       "short",        "signed",        "sizeof",
      "static",       "static_assert", "static_cast",  "struct",
      "switch",       "template",     "this",          "thread_local",
      "throw",        "true",         "try",           "typedef",
      "typeid",       "typename",     "union",         "unsigned",
      "using",        "virtual",      "void",          "volatile",
      "wchar_t",      "while",        "xor",           "xor_eq",
  };
  return kKeywords;
}

std::unordered_set<std::string> load_keywords(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ArgumentError("cannot open keyword file: " + path);
  std::unordered_set<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    // trim
    std::size_t b = 0, e = line.size();
    while (b < e && is_space(line[b])) ++b;
    while (e > b && (is_space(line[e - 1]) || line[e - 1] == '\n')) --e;
    if (b == e || line[b] == '#') continue;
    out.insert(line.substr(b, e - b));
  }
  return out;
}

std::vector<Token> tokenize(const std::string& code,
                            const std::unordered_set<std::string>& keywords) {
  std::vector<Token> out;
  const std::size_t n = code.size();
  std::size_t i = 0;
  int line = 0;

  auto push = [&](std::size_t begin, std::size_t end, TokenKind kind) {
    out.push_back(Token{code.substr(begin, end - begin), kind, line, begin, end});
  };

  while (i < n) {
    char c = code[i];
    if (c == '\n') {
      ++line;
      ++i;
      continue;
    }
    if (is_space(c)) {
      ++i;
      continue;
    }

    // string / char literal: one token, quotes included; backslash escapes
    // honored; an unterminated literal ends at end of line (strings do not
    // span lines), keeping the lexer total.
    if (c == '"' || c == '\'') {
      const char quote = c;
      const std::size_t begin = i++;
      while (i < n && code[i] != quote && code[i] != '\n') {
        if (code[i] == '\\' && i + 1 < n && code[i + 1] != '\n') {
          i += 2;
        } else {
          ++i;
        }
      }
      if (i < n && code[i] == quote) ++i;
      push(begin, i, TokenKind::String);
      continue;
    }

    // number: digits, or '.' followed by a digit; consumes identifier-ish
    // continuation characters plus exponent signs, so 1.5e-3, 0xFF and 1.0d0
    // each come back as one token.
    if (is_digit(c) || (c == '.' && i + 1 < n && is_digit(code[i + 1]))) {
      const std::size_t begin = i++;
      while (i < n) {
        const char d = code[i];
        if (is_ident_char(d) || d == '.') {
          ++i;
          continue;
        }
        const char prev = code[i - 1];
        if ((d == '+' || d == '-') &&
            (prev == 'e' || prev == 'E' || prev == 'p' || prev == 'P')) {
          ++i;
          continue;
        }
        break;
      }
      push(begin, i, TokenKind::Number);
      continue;
    }

    if (is_ident_start(c)) {
      const std::size_t begin = i;
      while (i < n && is_ident_char(code[i])) ++i;
      const std::string text = code.substr(begin, i - begin);
      push(begin, i,
           keywords.count(text) ? TokenKind::Keyword : TokenKind::Identifier);
      continue;
    }

    // compound operators (maximal munch)
    bool matched = false;
    for (const char* op : kCompoundOps) {
      const std::size_t len = std::strlen(op);
      if (code.compare(i, len, op) == 0) {
        push(i, i + len, TokenKind::Operator);
        i += len;
        matched = true;
        break;
      }
    }
    if (matched) continue;

    // single character: statement/grouping punctuation vs everything else
    // (the NUL guard keeps strchr from matching its own terminator)
    const TokenKind kind = (c != '\0' && std::strchr(";,(){}[]", c) != nullptr)
                               ? TokenKind::Punct
                               : TokenKind::Operator;
    push(i, i + 1, kind);
    ++i;
  }
  return out;
}

}  // namespace ragxlate
