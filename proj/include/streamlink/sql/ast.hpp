#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "streamlink/sql/lexer.hpp"

namespace streamlink::sql {

// Byte range in the source text. Positions never take part in structural
// equality: two trees parsed from differently spaced text compare equal.
struct SourceSpan {
  std::size_t begin = 0;
  std::size_t end = 0;
  friend bool operator==(const SourceSpan&, const SourceSpan&) { return true; }
};

// Heap-allocated value with deep copy; lets recursive variants keep value
// semantics.
template <class T>
class Box {
 public:
  Box(T value) : ptr_(std::make_unique<T>(std::move(value))) {}  // NOLINT(implicit)
  Box(const Box& other) : ptr_(std::make_unique<T>(*other.ptr_)) {}
  Box(Box&&) noexcept = default;
  Box& operator=(const Box& other) {
    if (this != &other) ptr_ = std::make_unique<T>(*other.ptr_);
    return *this;
  }
  Box& operator=(Box&&) noexcept = default;

  T& operator*() { return *ptr_; }
  const T& operator*() const { return *ptr_; }
  T* operator->() { return ptr_.get(); }
  const T* operator->() const { return ptr_.get(); }

  friend bool operator==(const Box& a, const Box& b) { return *a.ptr_ == *b.ptr_; }

 private:
  std::unique_ptr<T> ptr_;
};

struct StringLit {
  std::string value;
  QuoteStyle quote = QuoteStyle::Single;
  bool operator==(const StringLit&) const = default;
};

using Literal = std::variant<std::int64_t, double, StringLit>;

struct ColumnRef {
  std::string name;
  bool operator==(const ColumnRef&) const = default;
};

using Operand = std::variant<ColumnRef, Literal>;

enum class CompareOp { Eq, Ne, Lt, Le, Gt, Ge };

struct Expr;

struct Compare {
  CompareOp op = CompareOp::Eq;
  Operand lhs;
  Operand rhs;
  SourceSpan span;
  bool operator==(const Compare&) const = default;
};

struct Like {
  Operand operand;
  StringLit pattern;  // % and _ kept verbatim
  bool negated = false;
  SourceSpan span;
  bool operator==(const Like&) const = default;
};

struct InList {
  Operand operand;
  std::vector<Literal> values;  // non-empty
  bool negated = false;
  SourceSpan span;
  bool operator==(const InList&) const = default;
};

struct Between {
  Operand operand;
  Operand low;
  Operand high;
  bool negated = false;
  SourceSpan span;
  bool operator==(const Between&) const = default;
};

enum class LogicalOp { And, Or };

// n-ary conjunction/disjunction; an unparenthesised chain `a AND b AND c`
// is a single node with three operands.
struct Logical {
  LogicalOp op = LogicalOp::And;
  std::vector<Expr> operands;  // size >= 2
  bool operator==(const Logical&) const;
};

struct Not {
  Box<Expr> operand;
  bool operator==(const Not&) const;
};

struct Expr {
  std::variant<Compare, Like, InList, Between, Logical, Not> node;
  bool operator==(const Expr&) const = default;
};

inline bool Logical::operator==(const Logical& o) const {
  return op == o.op && operands == o.operands;
}
inline bool Not::operator==(const Not& o) const { return operand == o.operand; }

struct StarItem {
  bool operator==(const StarItem&) const = default;
};
struct ColumnItem {
  std::string name;
  std::optional<std::string> alias;
  bool operator==(const ColumnItem&) const = default;
};
struct CountStarItem {
  std::optional<std::string> alias;
  bool operator==(const CountStarItem&) const = default;
};
using SelectItem = std::variant<StarItem, ColumnItem, CountStarItem>;

struct OrderKey {
  std::string name;
  bool descending = false;
  bool operator==(const OrderKey&) const = default;
};

struct Select {
  std::vector<SelectItem> items;  // non-empty
  std::string table;
  std::optional<Expr> where;
  std::vector<std::string> group_by;
  std::vector<OrderKey> order_by;
  std::optional<std::int64_t> limit;  // >= 0
  bool operator==(const Select&) const = default;
};

struct Insert {
  std::string table;
  std::vector<std::string> columns;  // may be empty
  std::vector<std::vector<Literal>> rows;
  bool operator==(const Insert&) const = default;
};

struct Assignment {
  std::string column;
  Literal value;
  bool operator==(const Assignment&) const = default;
};

struct Update {
  std::string table;
  std::vector<Assignment> assignments;
  std::optional<Expr> where;
  bool operator==(const Update&) const = default;
};

struct Delete {
  std::string table;
  std::optional<Expr> where;
  bool operator==(const Delete&) const = default;
};

struct Drop {
  std::string table;
  bool if_exists = false;
  bool operator==(const Drop&) const = default;
};

struct Union {
  std::vector<Select> selects;  // size >= 2
  std::vector<bool> all;        // size selects.size() - 1; UNION ALL per junction
  bool operator==(const Union&) const = default;
};

struct Statement;

// Semicolon-separated statements; >= 2 entries, none of them Stacked.
struct Stacked {
  std::vector<Statement> statements;
  bool operator==(const Stacked&) const;
};

struct Statement {
  std::variant<Select, Insert, Update, Delete, Drop, Union, Stacked> node;
  bool operator==(const Statement&) const = default;

  template <class T>
  bool is() const { return std::holds_alternative<T>(node); }
  template <class T>
  const T& as() const { return std::get<T>(node); }
};

inline bool Stacked::operator==(const Stacked& o) const { return statements == o.statements; }

enum class StatementClass { Select, Insert, Update, Delete, Drop };

std::string_view to_string(StatementClass c);

// Leaf statement classes (a UNION counts as Select; Stacked contributes
// every member's class).
std::vector<StatementClass> statement_classes(const Statement& stmt);

inline bool is_write(StatementClass c) { return c != StatementClass::Select; }

}  // namespace streamlink::sql
