#include <gtest/gtest.h>

#include <cctype>

#include "fixtures.hpp"
#include "sql_gen.hpp"
#include "streamlink/sql/lexer.hpp"
#include "streamlink/sql/printer.hpp"

using namespace streamlink::sql;
using streamlink::testkit::kIntelTopCpcSql;

namespace {

ParseErrorKind lex_error(std::string_view text, std::size_t* offset = nullptr) {
  try {
    tokenize(text);
  } catch (const ParseError& e) {
    if (offset) *offset = e.offset();
    return e.kind();
  }
  ADD_FAILURE() << "no error for: " << text;
  return ParseErrorKind::SyntaxError;
}

// Re-assembles the input from token lexemes; gaps must be pure whitespace.
std::string reassemble(std::string_view text, const std::vector<Token>& tokens) {
  std::string out;
  std::size_t pos = 0;
  for (const auto& t : tokens) {
    for (std::size_t i = pos; i < t.offset; ++i) {
      EXPECT_TRUE(std::isspace(static_cast<unsigned char>(text[i]))) << "non-space gap at " << i;
    }
    out.append(text.substr(pos, t.offset - pos));
    EXPECT_EQ(text.substr(t.offset, t.text.size()), t.text);
    out += t.text;
    pos = t.end();
  }
  out.append(text.substr(pos));
  return out;
}

}  // namespace

TEST(Lexer, KeepsTrailingComment) {
  auto tokens = tokenize("SELECT 1 -- x");
  ASSERT_EQ(tokens.size(), 3u);
  EXPECT_TRUE(tokens[0].is_keyword("SELECT"));
  EXPECT_EQ(tokens[1].kind, TokenKind::Integer);
  EXPECT_EQ(tokens[1].text, "1");
  EXPECT_EQ(tokens[2].kind, TokenKind::Comment);
  EXPECT_EQ(tokens[2].text, "-- x");
}

TEST(Lexer, AllCommentStyles) {
  auto tokens = tokenize("a /* b */ # c\n-- d");
  ASSERT_EQ(tokens.size(), 4u);
  EXPECT_EQ(tokens[1].text, "/* b */");
  EXPECT_EQ(tokens[2].text, "# c");
  EXPECT_EQ(tokens[3].text, "-- d");
  for (std::size_t i = 1; i < 4; ++i) EXPECT_EQ(tokens[i].kind, TokenKind::Comment);
}

TEST(Lexer, DoubledQuoteEscape) {
  auto tokens = tokenize("WHERE a = 'it''s'");
  ASSERT_EQ(tokens.size(), 4u);
  EXPECT_EQ(tokens[3].kind, TokenKind::String);
  EXPECT_EQ(tokens[3].value, "it's");
  EXPECT_EQ(tokens[3].text, "'it''s'");

  auto dq = tokenize(R"(x = "say ""hi""")");
  EXPECT_EQ(dq.back().value, "say \"hi\"");
  EXPECT_EQ(dq.back().quote, QuoteStyle::Double);
}

TEST(Lexer, ExampleCommandHas28Tokens) {
  auto tokens = tokenize(kIntelTopCpcSql);
  EXPECT_EQ(tokens.size(), 28u);
  EXPECT_EQ(tokens[3].kind, TokenKind::Identifier);  // COUNT is an ordinary name
  EXPECT_EQ(tokens[14].value, "%Intel%");
  EXPECT_EQ(tokens[18].value, "2009");
}

TEST(Lexer, ErrorsCarryOffsets) {
  std::size_t at = 99;
  EXPECT_EQ(lex_error("SELECT 'abc", &at), ParseErrorKind::UnterminatedString);
  EXPECT_EQ(at, 7u);
  EXPECT_EQ(lex_error("a /* open", &at), ParseErrorKind::UnterminatedComment);
  EXPECT_EQ(at, 2u);
  EXPECT_EQ(lex_error("a = ?", &at), ParseErrorKind::IllegalCharacter);
  EXPECT_EQ(at, 4u);
}

TEST(Lexer, InputCap) {
  std::string big(100, 'a');
  LexOptions opts;
  opts.max_bytes = 64;
  EXPECT_THROW(tokenize(big, opts), ParseError);
  EXPECT_NO_THROW(tokenize(std::string(64 * 1024, ' ')));
  EXPECT_THROW(tokenize(std::string(64 * 1024 + 1, ' ')), ParseError);
}

TEST(Lexer, LenientModeNeverThrows) {
  LexOptions opts;
  opts.lenient = true;
  auto tokens = tokenize("x = 'abc", opts);
  ASSERT_EQ(tokens.size(), 3u);
  EXPECT_EQ(tokens[2].kind, TokenKind::String);
  EXPECT_FALSE(tokens[2].complete);

  auto odd = tokenize("a ? b", opts);
  ASSERT_EQ(odd.size(), 3u);
  EXPECT_EQ(odd[1].kind, TokenKind::Unknown);
}

TEST(Lexer, NumbersAndHex) {
  auto tokens = tokenize("1 2.5 1e3 .5 0x1F");
  ASSERT_EQ(tokens.size(), 5u);
  EXPECT_EQ(tokens[0].kind, TokenKind::Integer);
  EXPECT_EQ(tokens[1].kind, TokenKind::Float);
  EXPECT_EQ(tokens[2].kind, TokenKind::Float);
  EXPECT_EQ(tokens[3].kind, TokenKind::Float);
  EXPECT_EQ(tokens[4].kind, TokenKind::HexLiteral);
}

TEST(Lexer, BacktickIdentifier) {
  auto tokens = tokenize("`my col`");
  ASSERT_EQ(tokens.size(), 1u);
  EXPECT_EQ(tokens[0].kind, TokenKind::Identifier);
  EXPECT_TRUE(tokens[0].quoted_identifier);
  EXPECT_EQ(tokens[0].value, "my col");
}

TEST(Lexer, KeywordsCaseInsensitive) {
  auto tokens = tokenize("select Select SELECT");
  for (const auto& t : tokens) EXPECT_TRUE(t.is_keyword("SELECT"));
}

TEST(LexerProperty, LosslessOnPrintedStatements) {
  streamlink::SeededRng rng(11);
  for (int i = 0; i < 300; ++i) {
    std::string text = print(streamlink::testkit::random_statement(rng));
    text = "  " + text + " -- tail\n";
    auto tokens = tokenize(text);
    EXPECT_EQ(reassemble(text, tokens), text);
  }
}

TEST(LexerProperty, LosslessOnArbitraryBytesInLenientMode) {
  streamlink::SeededRng rng(12);
  LexOptions opts;
  opts.lenient = true;
  const std::string alphabet = "ab1 '\"`-#/*;=<>!()%,.\n\t\x01\xff";
  for (int i = 0; i < 500; ++i) {
    std::string text;
    auto n = rng.below(30);
    for (std::uint64_t k = 0; k < n; ++k) text += alphabet[rng.below(alphabet.size())];
    auto tokens = tokenize(text, opts);
    EXPECT_EQ(reassemble(text, tokens), text);
  }
}
