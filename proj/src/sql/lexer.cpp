#include "streamlink/sql/lexer.hpp"

#include <algorithm>
#include <array>
#include <cctype>

#include "streamlink/strings.hpp"

namespace streamlink::sql {

namespace {

constexpr std::array kKeywords = {
    "ALL",    "AND",   "AS",     "ASC",    "BETWEEN", "BY",     "CROSS",    "DELETE",
    "DESC",   "DISTINCT", "DROP", "EXISTS", "FROM",   "FULL",   "GROUP",    "HAVING",
    "IF",     "IN",    "INNER",  "INSERT", "INTO",    "IS",     "JOIN",     "LEFT",
    "LIKE",   "LIMIT", "NOT",    "NULL",   "OFFSET",  "ON",     "OR",       "ORDER",
    "OUTER",  "RIGHT", "SELECT", "SET",    "TABLE",   "UNION",  "UPDATE",   "VALUES",
    "WHERE",  "WITH",
};

bool is_ident_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_' ||
         static_cast<unsigned char>(c) >= 0x80;
}

bool is_ident_char(char c) {
  return is_ident_start(c) || std::isdigit(static_cast<unsigned char>(c)) || c == '$';
}

bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

class Lexer {
 public:
  Lexer(std::string_view text, const LexOptions& options) : text_(text), options_(options) {}

  std::vector<Token> run() {
    if (text_.size() > options_.max_bytes && !options_.lenient) {
      throw ParseError(ParseErrorKind::InputTooLong, options_.max_bytes,
                       "input exceeds " + std::to_string(options_.max_bytes) + " bytes");
    }
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
        continue;
      }
      std::size_t start = pos_;
      if (c == '-' && peek(1) == '-') {
        line_comment(start);
      } else if (c == '#') {
        line_comment(start);
      } else if (c == '/' && peek(1) == '*') {
        block_comment(start);
      } else if (c == '\'' || c == '"') {
        string_literal(start, c);
      } else if (c == '`') {
        quoted_identifier(start);
      } else if (c == '0' && (peek(1) == 'x' || peek(1) == 'X') && std::isxdigit(static_cast<unsigned char>(peek(2)))) {
        pos_ += 2;
        while (pos_ < text_.size() && std::isxdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        push(TokenKind::HexLiteral, start);
      } else if (is_digit(c) || (c == '.' && is_digit(peek(1)) && !after_name())) {
        number(start);
      } else if (is_ident_start(c)) {
        while (pos_ < text_.size() && is_ident_char(text_[pos_])) ++pos_;
        std::string upper = to_upper(text_.substr(start, pos_ - start));
        if (is_keyword(upper)) {
          push(TokenKind::Keyword, start, upper);
        } else {
          push(TokenKind::Identifier, start);
        }
      } else {
        punctuation(start, c);
      }
    }
    return std::move(tokens_);
  }

 private:
  char peek(std::size_t ahead) const {
    return pos_ + ahead < text_.size() ? text_[pos_ + ahead] : '\0';
  }

  // `t.5` stays a qualified name; `.5` elsewhere is a float.
  bool after_name() const {
    return !tokens_.empty() && tokens_.back().kind == TokenKind::Identifier && tokens_.back().end() == pos_;
  }

  Token& push(TokenKind kind, std::size_t start) {
    std::string lexeme(text_.substr(start, pos_ - start));
    return push(kind, start, lexeme);
  }

  Token& push(TokenKind kind, std::size_t start, std::string value) {
    Token t;
    t.kind = kind;
    t.offset = start;
    t.text = std::string(text_.substr(start, pos_ - start));
    t.value = std::move(value);
    tokens_.push_back(std::move(t));
    return tokens_.back();
  }

  void line_comment(std::size_t start) {
    while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
    push(TokenKind::Comment, start);
  }

  void block_comment(std::size_t start) {
    std::size_t close = text_.find("*/", pos_ + 2);
    if (close == std::string_view::npos) {
      if (!options_.lenient) {
        throw ParseError(ParseErrorKind::UnterminatedComment, start, "unterminated block comment");
      }
      pos_ = text_.size();
      push(TokenKind::Comment, start).complete = false;
      return;
    }
    pos_ = close + 2;
    push(TokenKind::Comment, start);
  }

  void string_literal(std::size_t start, char quote) {
    std::string decoded;
    ++pos_;
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (c == quote) {
        if (peek(1) == quote) {
          decoded.push_back(quote);
          pos_ += 2;
          continue;
        }
        ++pos_;
        Token& t = push(TokenKind::String, start, std::move(decoded));
        t.quote = quote == '\'' ? QuoteStyle::Single : QuoteStyle::Double;
        return;
      }
      decoded.push_back(c);
      ++pos_;
    }
    if (!options_.lenient) {
      throw ParseError(ParseErrorKind::UnterminatedString, start, "unterminated string literal");
    }
    Token& t = push(TokenKind::String, start, std::move(decoded));
    t.quote = quote == '\'' ? QuoteStyle::Single : QuoteStyle::Double;
    t.complete = false;
  }

  void quoted_identifier(std::size_t start) {
    std::string name;
    ++pos_;
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (c == '`') {
        if (peek(1) == '`') {
          name.push_back('`');
          pos_ += 2;
          continue;
        }
        ++pos_;
        push(TokenKind::Identifier, start, std::move(name)).quoted_identifier = true;
        return;
      }
      name.push_back(c);
      ++pos_;
    }
    if (!options_.lenient) {
      throw ParseError(ParseErrorKind::UnterminatedString, start, "unterminated quoted identifier");
    }
    Token& t = push(TokenKind::Identifier, start, std::move(name));
    t.quoted_identifier = true;
    t.complete = false;
  }

  void number(std::size_t start) {
    bool is_float = false;
    while (is_digit(peek(0))) ++pos_;
    if (peek(0) == '.' && is_digit(peek(1))) {
      is_float = true;
      ++pos_;
      while (is_digit(peek(0))) ++pos_;
    }
    if ((peek(0) == 'e' || peek(0) == 'E') &&
        (is_digit(peek(1)) || ((peek(1) == '+' || peek(1) == '-') && is_digit(peek(2))))) {
      is_float = true;
      pos_ += 2;
      while (is_digit(peek(0))) ++pos_;
    }
    push(is_float ? TokenKind::Float : TokenKind::Integer, start);
  }

  void punctuation(std::size_t start, char c) {
    auto two = text_.substr(pos_, 2);
    if (two == "<=" || two == ">=" || two == "<>" || two == "!=" || two == "||") {
      pos_ += 2;
      push(TokenKind::Operator, start);
      return;
    }
    ++pos_;
    switch (c) {
      case ',': push(TokenKind::Comma, start); return;
      case '(': push(TokenKind::LParen, start); return;
      case ')': push(TokenKind::RParen, start); return;
      case ';': push(TokenKind::Semicolon, start); return;
      case '*': push(TokenKind::Star, start); return;
      case '.': push(TokenKind::Dot, start); return;
      case '=': case '<': case '>': case '+': case '-': case '/': case '%':
        push(TokenKind::Operator, start);
        return;
      default:
        break;
    }
    if (!options_.lenient) {
      throw ParseError(ParseErrorKind::IllegalCharacter, start,
                       std::string("illegal character '") + c + "'");
    }
    push(TokenKind::Unknown, start);
  }

  std::string_view text_;
  LexOptions options_;
  std::size_t pos_ = 0;
  std::vector<Token> tokens_;
};

}  // namespace

std::string_view to_string(ParseErrorKind kind) {
  switch (kind) {
    case ParseErrorKind::UnterminatedString: return "UnterminatedString";
    case ParseErrorKind::UnterminatedComment: return "UnterminatedComment";
    case ParseErrorKind::IllegalCharacter: return "IllegalCharacter";
    case ParseErrorKind::InputTooLong: return "InputTooLong";
    case ParseErrorKind::SyntaxError: return "SyntaxError";
    case ParseErrorKind::UnsupportedFeature: return "UnsupportedFeature";
  }
  return "ParseError";
}

ParseError::ParseError(ParseErrorKind kind, std::size_t offset, std::string detail,
                       std::vector<std::string> expected)
    : Error(std::string(to_string(kind)),
            std::string(to_string(kind)) + " at offset " + std::to_string(offset) + ": " + detail),
      kind_(kind),
      offset_(offset),
      detail_(std::move(detail)),
      expected_(std::move(expected)) {}

bool is_keyword(std::string_view word) {
  std::string upper = to_upper(word);
  return std::binary_search(kKeywords.begin(), kKeywords.end(), upper,
                            [](std::string_view a, std::string_view b) { return a < b; });
}

std::vector<Token> tokenize(std::string_view text, const LexOptions& options) {
  return Lexer(text, options).run();
}

}  // namespace streamlink::sql
