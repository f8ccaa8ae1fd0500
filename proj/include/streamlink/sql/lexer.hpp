#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "streamlink/error.hpp"

namespace streamlink::sql {

enum class TokenKind {
  Keyword,
  Identifier,
  Integer,
  Float,
  HexLiteral,
  String,
  Operator,
  Comma,
  LParen,
  RParen,
  Semicolon,
  Star,
  Dot,
  Comment,
  Unknown,  // lenient mode only: a byte the strict lexer rejects
};

enum class QuoteStyle { Single, Double };

struct Token {
  TokenKind kind = TokenKind::Unknown;
  std::string text;   // raw lexeme, byte-exact
  std::size_t offset = 0;
  // Keywords: upper-cased word. Strings: decoded contents. Quoted
  // identifiers: inner name. Otherwise equal to `text`.
  std::string value;
  QuoteStyle quote = QuoteStyle::Single;
  bool quoted_identifier = false;
  bool complete = true;  // false for a string/comment cut off by end of input

  std::size_t end() const { return offset + text.size(); }
  bool is_keyword(std::string_view upper) const {
    return kind == TokenKind::Keyword && value == upper;
  }
};

enum class ParseErrorKind {
  UnterminatedString,
  UnterminatedComment,
  IllegalCharacter,
  InputTooLong,
  SyntaxError,
  UnsupportedFeature,
};

std::string_view to_string(ParseErrorKind kind);

class ParseError : public Error {
 public:
  ParseError(ParseErrorKind kind, std::size_t offset, std::string detail,
             std::vector<std::string> expected = {});

  ParseErrorKind kind() const noexcept { return kind_; }
  std::size_t offset() const noexcept { return offset_; }
  const std::string& detail() const noexcept { return detail_; }
  const std::vector<std::string>& expected() const noexcept { return expected_; }

 private:
  ParseErrorKind kind_;
  std::size_t offset_;
  std::string detail_;
  std::vector<std::string> expected_;
};

struct LexOptions {
  std::size_t max_bytes = 64 * 1024;
  // Never throw: unterminated strings/comments run to end of input and
  // illegal bytes become Unknown tokens. Used by the security rules, which
  // must look at inputs the parser rejects.
  bool lenient = false;
};

std::vector<Token> tokenize(std::string_view text, const LexOptions& options = {});

bool is_keyword(std::string_view word);

}  // namespace streamlink::sql
