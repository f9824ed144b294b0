#include "ragxlate/tokenizer.hpp"

#include <gtest/gtest.h>

#include <random>
#include <string>
#include <vector>

#include "ragxlate/errors.hpp"

using ragxlate::Token;
using ragxlate::TokenKind;
using ragxlate::tokenize;

namespace {

std::vector<std::string> texts(const std::vector<Token>& toks) {
  std::vector<std::string> out;
  for (const auto& t : toks) out.push_back(t.text);
  return out;
}

std::vector<TokenKind> kinds(const std::vector<Token>& toks) {
  std::vector<TokenKind> out;
  for (const auto& t : toks) out.push_back(t.kind);
  return out;
}

}  // namespace

TEST(Tokenizer, ClassifiesBasicStatement) {
  const auto toks = tokenize("int x = 42;");
  ASSERT_EQ(toks.size(), 5u);
  EXPECT_EQ(toks[0].text, "int");
  EXPECT_EQ(toks[0].kind, TokenKind::Keyword);
  EXPECT_EQ(toks[1].text, "x");
  EXPECT_EQ(toks[1].kind, TokenKind::Identifier);
  EXPECT_EQ(toks[2].text, "=");
  EXPECT_EQ(toks[2].kind, TokenKind::Operator);
  EXPECT_EQ(toks[3].text, "42");
  EXPECT_EQ(toks[3].kind, TokenKind::Number);
  EXPECT_EQ(toks[4].text, ";");
  EXPECT_EQ(toks[4].kind, TokenKind::Punct);
}

TEST(Tokenizer, ByteOffsetsAndLines) {
  const std::string code = "a\n  b2";
  const auto toks = tokenize(code);
  ASSERT_EQ(toks.size(), 2u);
  EXPECT_EQ(toks[0].line, 0);
  EXPECT_EQ(toks[0].begin, 0u);
  EXPECT_EQ(toks[0].end, 1u);
  EXPECT_EQ(toks[1].line, 1);
  EXPECT_EQ(toks[1].begin, 4u);
  EXPECT_EQ(toks[1].end, 6u);
  // offsets point back into the input
  for (const auto& t : toks)
    EXPECT_EQ(code.substr(t.begin, t.end - t.begin), t.text);
}

TEST(Tokenizer, NumbersAreSingleTokens) {
  for (const std::string n :
       {"1", "42", "1.5", "1.5e-3", "2E+10", "0xFF", "0x1p-4", "1.0d0", ".5",
        "123_ull", "1'000"}) {
    const auto toks = tokenize(n);
    if (n == "1'000") {
      // digit separators are not glued: number then a char-literal-ish tail
      ASSERT_GE(toks.size(), 1u) << n;
      EXPECT_EQ(toks[0].text, "1");
      continue;
    }
    ASSERT_EQ(toks.size(), 1u) << n;
    EXPECT_EQ(toks[0].text, n);
    EXPECT_EQ(toks[0].kind, TokenKind::Number);
  }
}

TEST(Tokenizer, DotWithoutDigitIsOperator) {
  const auto toks = tokenize("a.b");
  ASSERT_EQ(toks.size(), 3u);
  EXPECT_EQ(toks[1].text, ".");
  EXPECT_EQ(toks[1].kind, TokenKind::Operator);
}

TEST(Tokenizer, StringAndCharLiterals) {
  const auto toks = tokenize("s = \"hi ! there\" + 'c';");
  ASSERT_EQ(toks.size(), 6u);
  EXPECT_EQ(toks[2].text, "\"hi ! there\"");
  EXPECT_EQ(toks[2].kind, TokenKind::String);
  EXPECT_EQ(toks[4].text, "'c'");
  EXPECT_EQ(toks[4].kind, TokenKind::String);
}

TEST(Tokenizer, EscapedQuoteInsideString) {
  const auto toks = tokenize(R"("a\"b")");
  ASSERT_EQ(toks.size(), 1u);
  EXPECT_EQ(toks[0].text, R"("a\"b")");
  EXPECT_EQ(toks[0].kind, TokenKind::String);
}

TEST(Tokenizer, UnterminatedStringEndsAtNewline) {
  const auto toks = tokenize("\"open\nx");
  ASSERT_EQ(toks.size(), 2u);
  EXPECT_EQ(toks[0].text, "\"open");
  EXPECT_EQ(toks[0].kind, TokenKind::String);
  EXPECT_EQ(toks[1].text, "x");
}

TEST(Tokenizer, CompoundOperatorsMaximalMunch) {
  EXPECT_EQ(texts(tokenize("a<<=b")), (std::vector<std::string>{"a", "<<=", "b"}));
  EXPECT_EQ(texts(tokenize("a<=>b")), (std::vector<std::string>{"a", "<=>", "b"}));
  EXPECT_EQ(texts(tokenize("x::y->z")),
            (std::vector<std::string>{"x", "::", "y", "->", "z"}));
  EXPECT_EQ(texts(tokenize("i++ + ++j")),
            (std::vector<std::string>{"i", "++", "+", "++", "j"}));
  EXPECT_EQ(texts(tokenize("a==b!=c")),
            (std::vector<std::string>{"a", "==", "b", "!=", "c"}));
}

TEST(Tokenizer, PunctVersusOperator) {
  const auto toks = tokenize("f(a, b) { [x] }");
  for (const auto& t : toks) {
    if (t.text == "(" || t.text == ")" || t.text == "," || t.text == "{" ||
        t.text == "}" || t.text == "[" || t.text == "]") {
      EXPECT_EQ(t.kind, TokenKind::Punct) << t.text;
    }
  }
  const auto ops = tokenize("a + b * c % d");
  EXPECT_EQ(kinds(ops),
            (std::vector<TokenKind>{TokenKind::Identifier, TokenKind::Operator,
                                    TokenKind::Identifier, TokenKind::Operator,
                                    TokenKind::Identifier, TokenKind::Operator,
                                    TokenKind::Identifier}));
}

TEST(Tokenizer, NeverThrowsOnArbitraryBytes) {
  std::string junk;
  junk.push_back('\0');
  junk += "\x01\x7f\xff\xc3\xa9 @ $ ` \\ ?";
  junk.push_back('\0');
  std::vector<Token> toks;
  EXPECT_NO_THROW(toks = tokenize(junk));
  // NUL must not be classified as statement punctuation
  for (const auto& t : toks) {
    if (t.text.size() == 1 && t.text[0] == '\0')
      EXPECT_EQ(t.kind, TokenKind::Operator);
  }
}

TEST(Tokenizer, RandomInputTotalAndOffsetConsistent) {
  std::mt19937 rng(20240817u);
  std::uniform_int_distribution<int> len(0, 200);
  std::uniform_int_distribution<int> byte(0, 255);
  for (int iter = 0; iter < 200; ++iter) {
    std::string s;
    const int m = len(rng);
    for (int i = 0; i < m; ++i) s.push_back(static_cast<char>(byte(rng)));
    std::vector<Token> toks;
    ASSERT_NO_THROW(toks = tokenize(s));
    std::size_t prev_end = 0;
    for (const auto& t : toks) {
      ASSERT_LE(prev_end, t.begin);
      ASSERT_LT(t.begin, t.end);
      ASSERT_LE(t.end, s.size());
      ASSERT_EQ(s.substr(t.begin, t.end - t.begin), t.text);
      prev_end = t.end;
    }
  }
}

TEST(Tokenizer, KeywordFileMatchesBuiltinSet) {
  const auto from_file =
      ragxlate::load_keywords(std::string(RAGXLATE_DATA_DIR) + "/cpp_keywords.txt");
  EXPECT_EQ(from_file, ragxlate::default_cpp_keywords());
}

TEST(Tokenizer, LoadKeywordsMissingFileThrows) {
  EXPECT_THROW(ragxlate::load_keywords("/nonexistent/kw.txt"),
               ragxlate::ArgumentError);
}

TEST(Tokenizer, CustomKeywordSet) {
  const std::unordered_set<std::string> kw{"banana"};
  const auto toks = tokenize("banana int", kw);
  ASSERT_EQ(toks.size(), 2u);
  EXPECT_EQ(toks[0].kind, TokenKind::Keyword);
  EXPECT_EQ(toks[1].kind, TokenKind::Identifier);  // "int" not in custom set
}

TEST(Tokenizer, FortranStyleCodeLexes) {
  const auto toks = tokenize("do i = 1, n\n  y(i) = a*x(i) + y(i)\nend do");
  // 'do' is both a C++ and (coincidentally) Fortran keyword
  EXPECT_EQ(toks.front().text, "do");
  EXPECT_EQ(toks.front().kind, TokenKind::Keyword);
  bool saw_paren = false;
  for (const auto& t : toks)
    if (t.text == "(") saw_paren = true;
  EXPECT_TRUE(saw_paren);
}
