#include "streamlink/sql/parser.hpp"

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <limits>

#include "streamlink/strings.hpp"

namespace streamlink::sql {

namespace {

class Parser {
 public:
  Parser(std::vector<Token> tokens, std::size_t input_end)
      : tokens_(std::move(tokens)), input_end_(input_end) {
    std::erase_if(tokens_, [](const Token& t) { return t.kind == TokenKind::Comment; });
  }

  Statement run() {
    std::vector<Statement> parts;
    parts.push_back(statement());
    while (accept(TokenKind::Semicolon)) {
      if (at_end()) break;
      parts.push_back(statement());
    }
    if (!at_end()) {
      fail({"';'", "end of input"});
    }
    if (parts.size() == 1) return std::move(parts.front());
    return Statement{Stacked{std::move(parts)}};
  }

 private:
  // -- token cursor -------------------------------------------------------
  bool at_end() const { return pos_ >= tokens_.size(); }
  const Token* peek(std::size_t ahead = 0) const {
    return pos_ + ahead < tokens_.size() ? &tokens_[pos_ + ahead] : nullptr;
  }
  std::size_t offset() const { return at_end() ? input_end_ : tokens_[pos_].offset; }
  std::size_t prev_end() const { return pos_ == 0 ? 0 : tokens_[pos_ - 1].end(); }

  bool check_kw(std::string_view kw, std::size_t ahead = 0) const {
    const Token* t = peek(ahead);
    return t != nullptr && t->is_keyword(kw);
  }
  bool check(TokenKind kind, std::size_t ahead = 0) const {
    const Token* t = peek(ahead);
    return t != nullptr && t->kind == kind;
  }
  bool check_op(std::string_view op) const {
    const Token* t = peek();
    return t != nullptr && t->kind == TokenKind::Operator && t->text == op;
  }
  bool accept_kw(std::string_view kw) {
    if (!check_kw(kw)) return false;
    ++pos_;
    return true;
  }
  bool accept(TokenKind kind) {
    if (!check(kind)) return false;
    ++pos_;
    return true;
  }
  void expect_kw(std::string_view kw) {
    if (!accept_kw(kw)) fail({std::string(kw)});
  }
  void expect(TokenKind kind, std::string_view what) {
    if (!accept(kind)) fail({std::string(what)});
  }

  [[noreturn]] void fail(std::vector<std::string> expected) const {
    std::string found = at_end() ? "end of input" : "'" + tokens_[pos_].text + "'";
    std::string detail = "unexpected " + found + ", expected ";
    for (std::size_t i = 0; i < expected.size(); ++i) {
      if (i) detail += " | ";
      detail += expected[i];
    }
    throw ParseError(ParseErrorKind::SyntaxError, offset(), detail, std::move(expected));
  }
  [[noreturn]] void unsupported(std::string feature) const {
    throw ParseError(ParseErrorKind::UnsupportedFeature, offset(), std::move(feature));
  }

  // Rejects constructs outside the subset with UnsupportedFeature before a
  // generic SyntaxError would be produced.
  void screen_unsupported() const {
    const Token* t = peek();
    if (t == nullptr) return;
    if (t->kind == TokenKind::Keyword) {
      for (std::string_view kw : {"JOIN", "INNER", "LEFT", "RIGHT", "FULL", "CROSS", "OUTER"}) {
        if (t->value == kw) unsupported("JOIN");
      }
      if (t->value == "HAVING") unsupported("HAVING");
      if (t->value == "OFFSET") unsupported("OFFSET");
      if (t->value == "IS") unsupported("IS NULL");
      if (t->value == "NULL") unsupported("NULL");
    }
  }

  // -- statements -----------------------------------------------------------
  Statement statement() {
    screen_unsupported();
    if (check_kw("SELECT")) return select_or_union();
    if (check_kw("INSERT")) return Statement{insert()};
    if (check_kw("UPDATE")) return Statement{update()};
    if (check_kw("DELETE")) return Statement{del()};
    if (check_kw("DROP")) return Statement{drop()};
    if (check_kw("WITH")) unsupported("WITH");
    fail({"SELECT", "INSERT", "UPDATE", "DELETE", "DROP"});
  }

  Statement select_or_union() {
    Select first = select();
    if (!check_kw("UNION")) return Statement{std::move(first)};
    Union u;
    u.selects.push_back(std::move(first));
    while (accept_kw("UNION")) {
      u.all.push_back(accept_kw("ALL"));
      if (!check_kw("SELECT")) fail({"SELECT"});
      u.selects.push_back(select());
    }
    return Statement{std::move(u)};
  }

  Select select() {
    expect_kw("SELECT");
    if (check_kw("DISTINCT")) unsupported("DISTINCT");
    Select s;
    do {
      s.items.push_back(select_item());
    } while (accept(TokenKind::Comma));
    expect_kw("FROM");
    if (check(TokenKind::LParen)) unsupported("subquery");
    s.table = qualified_name();
    if (check(TokenKind::Comma)) unsupported("JOIN");
    screen_unsupported();
    if (accept_kw("WHERE")) s.where = expr();
    screen_unsupported();
    if (accept_kw("GROUP")) {
      expect_kw("BY");
      do {
        s.group_by.push_back(identifier());
      } while (accept(TokenKind::Comma));
    }
    screen_unsupported();
    if (accept_kw("ORDER")) {
      expect_kw("BY");
      do {
        std::size_t at = offset();
        OrderKey key;
        if (check(TokenKind::Identifier) && check(TokenKind::LParen, 1)) unsupported("ORDER BY expression");
        key.name = identifier();
        if (accept_kw("DESC")) {
          key.descending = true;
        } else {
          accept_kw("ASC");
        }
        validate_order_key(s, key, at);
        s.order_by.push_back(std::move(key));
      } while (accept(TokenKind::Comma));
    }
    screen_unsupported();
    if (accept_kw("LIMIT")) {
      const Token* t = peek();
      if (t == nullptr || t->kind != TokenKind::Integer) fail({"non-negative integer"});
      std::int64_t n = 0;
      auto [ptr, ec] = std::from_chars(t->text.data(), t->text.data() + t->text.size(), n);
      if (ec != std::errc()) fail({"non-negative integer"});
      s.limit = n;
      ++pos_;
    }
    screen_unsupported();
    return s;
  }

  static void validate_order_key(const Select& s, const OrderKey& key, std::size_t at) {
    auto matches = [&](const SelectItem& item) {
      return std::visit(
          [&](const auto& it) -> bool {
            using T = std::decay_t<decltype(it)>;
            if constexpr (std::is_same_v<T, StarItem>) {
              return true;
            } else if constexpr (std::is_same_v<T, ColumnItem>) {
              return iequals(it.name, key.name) || (it.alias && iequals(*it.alias, key.name));
            } else {
              return it.alias && iequals(*it.alias, key.name);
            }
          },
          item);
    };
    if (std::any_of(s.items.begin(), s.items.end(), matches)) return;
    if (std::any_of(s.group_by.begin(), s.group_by.end(),
                    [&](const std::string& g) { return iequals(g, key.name); })) {
      return;
    }
    throw ParseError(ParseErrorKind::SyntaxError, at,
                     "ORDER BY key '" + key.name + "' is not a projected column, alias or group-by column");
  }

  SelectItem select_item() {
    if (accept(TokenKind::Star)) return StarItem{};
    const Token* t = peek();
    if (t != nullptr && t->kind == TokenKind::Identifier && check(TokenKind::LParen, 1)) {
      if (!iequals(t->value, "count") || t->quoted_identifier) unsupported("function " + t->value);
      pos_ += 2;
      if (!accept(TokenKind::Star)) unsupported("COUNT over an expression");
      expect(TokenKind::RParen, "')'");
      CountStarItem item;
      item.alias = alias();
      return item;
    }
    if (t != nullptr && (t->kind == TokenKind::Integer || t->kind == TokenKind::Float ||
                         t->kind == TokenKind::String || t->kind == TokenKind::HexLiteral)) {
      unsupported("literal projection");
    }
    ColumnItem item;
    item.name = identifier();
    if (check(TokenKind::Dot)) unsupported("qualified column");
    item.alias = alias();
    return item;
  }

  std::optional<std::string> alias() {
    if (accept_kw("AS")) return identifier();
    return std::nullopt;
  }

  Insert insert() {
    expect_kw("INSERT");
    expect_kw("INTO");
    Insert ins;
    ins.table = qualified_name();
    if (accept(TokenKind::LParen)) {
      do {
        ins.columns.push_back(identifier());
      } while (accept(TokenKind::Comma));
      expect(TokenKind::RParen, "')'");
    }
    if (check_kw("SELECT")) unsupported("INSERT ... SELECT");
    expect_kw("VALUES");
    do {
      expect(TokenKind::LParen, "'('");
      std::vector<Literal> row;
      do {
        row.push_back(literal());
      } while (accept(TokenKind::Comma));
      expect(TokenKind::RParen, "')'");
      ins.rows.push_back(std::move(row));
    } while (accept(TokenKind::Comma));
    return ins;
  }

  Update update() {
    expect_kw("UPDATE");
    Update up;
    up.table = qualified_name();
    expect_kw("SET");
    do {
      Assignment a;
      a.column = identifier();
      if (!check_op("=")) fail({"'='"});
      ++pos_;
      a.value = literal();
      up.assignments.push_back(std::move(a));
    } while (accept(TokenKind::Comma));
    if (accept_kw("WHERE")) up.where = expr();
    return up;
  }

  Delete del() {
    expect_kw("DELETE");
    expect_kw("FROM");
    Delete d;
    d.table = qualified_name();
    if (accept_kw("WHERE")) d.where = expr();
    return d;
  }

  Drop drop() {
    expect_kw("DROP");
    expect_kw("TABLE");
    Drop d;
    if (accept_kw("IF")) {
      expect_kw("EXISTS");
      d.if_exists = true;
    }
    d.table = qualified_name();
    return d;
  }

  // -- names and literals ---------------------------------------------------
  std::string identifier() {
    const Token* t = peek();
    if (t == nullptr || t->kind != TokenKind::Identifier) fail({"identifier"});
    ++pos_;
    return t->value;
  }

  std::string qualified_name() {
    std::string name = identifier();
    while (accept(TokenKind::Dot)) name += "." + identifier();
    return name;
  }

  bool at_literal() const {
    const Token* t = peek();
    if (t == nullptr) return false;
    if (t->kind == TokenKind::Integer || t->kind == TokenKind::Float || t->kind == TokenKind::String) {
      return true;
    }
    if (t->kind == TokenKind::Operator && (t->text == "-" || t->text == "+")) {
      const Token* n = peek(1);
      return n != nullptr && (n->kind == TokenKind::Integer || n->kind == TokenKind::Float);
    }
    return false;
  }

  Literal literal() {
    const Token* t = peek();
    if (t != nullptr && t->kind == TokenKind::HexLiteral) unsupported("hex literal");
    if (!at_literal()) fail({"literal"});
    bool negative = false;
    if (t->kind == TokenKind::Operator) {
      negative = t->text == "-";
      ++pos_;
      t = peek();
    }
    ++pos_;
    if (t->kind == TokenKind::String) return StringLit{t->value, t->quote};
    if (t->kind == TokenKind::Float) {
      errno = 0;
      double v = std::strtod(t->text.c_str(), nullptr);
      if (errno == ERANGE && std::isinf(v)) {
        throw ParseError(ParseErrorKind::SyntaxError, t->offset, "float literal out of range");
      }
      return negative ? -v : v;
    }
    std::uint64_t magnitude = 0;
    auto [ptr, ec] = std::from_chars(t->text.data(), t->text.data() + t->text.size(), magnitude);
    constexpr auto kMax = static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max());
    if (ec != std::errc() || magnitude > kMax + (negative ? 1 : 0)) {
      throw ParseError(ParseErrorKind::SyntaxError, t->offset, "integer literal out of range");
    }
    if (negative) return static_cast<std::int64_t>(0 - magnitude);
    return static_cast<std::int64_t>(magnitude);
  }

  Operand operand() {
    const Token* t = peek();
    if (t != nullptr && t->kind == TokenKind::Identifier) {
      if (check(TokenKind::LParen, 1)) unsupported("function " + t->value);
      ++pos_;
      if (check(TokenKind::Dot)) unsupported("qualified column");
      return ColumnRef{t->value};
    }
    if (t != nullptr && t->kind == TokenKind::LParen && check_kw("SELECT", 1)) unsupported("subquery");
    return literal();
  }

  // -- expressions ----------------------------------------------------------
  Expr expr() { return or_expr(); }

  Expr or_expr() {
    Expr first = and_expr();
    if (!check_kw("OR")) return first;
    Logical node{LogicalOp::Or, {}};
    node.operands.push_back(std::move(first));
    while (accept_kw("OR")) node.operands.push_back(and_expr());
    return Expr{std::move(node)};
  }

  Expr and_expr() {
    Expr first = not_expr();
    if (!check_kw("AND")) return first;
    Logical node{LogicalOp::And, {}};
    node.operands.push_back(std::move(first));
    while (accept_kw("AND")) node.operands.push_back(not_expr());
    return Expr{std::move(node)};
  }

  Expr not_expr() {
    if (accept_kw("NOT")) return Expr{Not{not_expr()}};
    return predicate();
  }

  Expr predicate() {
    if (check(TokenKind::LParen)) {
      if (check_kw("SELECT", 1)) unsupported("subquery");
      ++pos_;
      Expr inner = expr();
      expect(TokenKind::RParen, "')'");
      return inner;
    }
    std::size_t begin = offset();
    screen_unsupported();
    Operand lhs = operand();
    screen_unsupported();
    bool negated = accept_kw("NOT");
    if (accept_kw("LIKE")) {
      const Token* t = peek();
      if (t == nullptr || t->kind != TokenKind::String) fail({"string pattern"});
      ++pos_;
      return Expr{Like{std::move(lhs), StringLit{t->value, t->quote}, negated, {begin, prev_end()}}};
    }
    if (accept_kw("IN")) {
      expect(TokenKind::LParen, "'('");
      if (check_kw("SELECT")) unsupported("subquery");
      InList in{std::move(lhs), {}, negated, {}};
      do {
        in.values.push_back(literal());
      } while (accept(TokenKind::Comma));
      expect(TokenKind::RParen, "')'");
      in.span = {begin, prev_end()};
      return Expr{std::move(in)};
    }
    if (accept_kw("BETWEEN")) {
      Operand low = operand();
      expect_kw("AND");
      Operand high = operand();
      return Expr{Between{std::move(lhs), std::move(low), std::move(high), negated, {begin, prev_end()}}};
    }
    if (negated) fail({"LIKE", "IN", "BETWEEN"});
    const Token* t = peek();
    static constexpr std::pair<std::string_view, CompareOp> kOps[] = {
        {"=", CompareOp::Eq}, {"!=", CompareOp::Ne}, {"<>", CompareOp::Ne}, {"<", CompareOp::Lt},
        {"<=", CompareOp::Le}, {">", CompareOp::Gt}, {">=", CompareOp::Ge}};
    if (t != nullptr && t->kind == TokenKind::Operator) {
      for (const auto& [text, op] : kOps) {
        if (t->text == text) {
          ++pos_;
          Operand rhs = operand();
          return Expr{Compare{op, std::move(lhs), std::move(rhs), {begin, prev_end()}}};
        }
      }
    }
    fail({"comparison operator", "LIKE", "IN", "BETWEEN"});
  }

  std::vector<Token> tokens_;
  std::size_t input_end_;
  std::size_t pos_ = 0;
};

}  // namespace

Statement parse(std::span<const Token> tokens) {
  std::size_t end = tokens.empty() ? 0 : tokens.back().end();
  return Parser(std::vector<Token>(tokens.begin(), tokens.end()), end).run();
}

Statement parse(std::string_view text, const LexOptions& options) {
  LexOptions strict = options;
  strict.lenient = false;
  std::vector<Token> tokens = tokenize(text, strict);
  return Parser(std::move(tokens), text.size()).run();
}

}  // namespace streamlink::sql
