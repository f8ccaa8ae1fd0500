#include "streamlink/sql/printer.hpp"

#include <array>
#include <cctype>
#include <charconv>

#include "streamlink/overloaded.hpp"
#include "streamlink/strings.hpp"

namespace streamlink::sql {

namespace {

std::string format_double(double v) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  std::string s(buf.data(), ptr);
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

std::string quote_string(const StringLit& lit) {
  char q = lit.quote == QuoteStyle::Single ? '\'' : '"';
  std::string out(1, q);
  for (char c : lit.value) {
    if (c == q) out.push_back(q);
    out.push_back(c);
  }
  out.push_back(q);
  return out;
}

bool plain_word(const std::string& name) {
  if (name.empty()) return false;
  auto first = static_cast<unsigned char>(name[0]);
  if (!(std::isalpha(first) || name[0] == '_' || first >= 0x80)) return false;
  for (char c : name) {
    auto u = static_cast<unsigned char>(c);
    if (!(std::isalnum(u) || c == '_' || c == '$' || u >= 0x80)) return false;
  }
  return !is_keyword(name);
}

class Printer {
 public:
  explicit Printer(const PrintOptions& options) : options_(options) {}

  std::string kw(std::string_view upper) const {
    return options_.keyword_case == KeywordCase::Upper ? std::string(upper) : to_lower(upper);
  }

  std::string statement(const Statement& stmt) const {
    return std::visit(
        Overloaded{
            [&](const Select& s) { return select(s); },
            [&](const Insert& s) { return insert(s); },
            [&](const Update& s) { return update(s); },
            [&](const Delete& s) {
              std::string out = kw("DELETE") + " " + kw("FROM") + " " + print_qualified(s.table);
              if (s.where) out += " " + kw("WHERE") + " " + expr(*s.where, 0);
              return out;
            },
            [&](const Drop& s) {
              std::string out = kw("DROP") + " " + kw("TABLE") + " ";
              if (s.if_exists) out += kw("IF") + " " + kw("EXISTS") + " ";
              return out + print_qualified(s.table);
            },
            [&](const Union& u) {
              std::string out = select(u.selects.front());
              for (std::size_t i = 1; i < u.selects.size(); ++i) {
                out += " " + kw("UNION");
                if (i - 1 < u.all.size() && u.all[i - 1]) out += " " + kw("ALL");
                out += " " + select(u.selects[i]);
              }
              return out;
            },
            [&](const Stacked& s) {
              std::string out;
              for (std::size_t i = 0; i < s.statements.size(); ++i) {
                if (i) out += "; ";
                out += statement(s.statements[i]);
              }
              return out;
            },
        },
        stmt.node);
  }

  std::string select(const Select& s) const {
    std::string out = kw("SELECT") + " ";
    for (std::size_t i = 0; i < s.items.size(); ++i) {
      if (i) out += ", ";
      out += std::visit(Overloaded{
                            [&](const StarItem&) { return std::string("*"); },
                            [&](const ColumnItem& c) {
                              std::string r = print_identifier(c.name);
                              if (c.alias) r += " " + kw("AS") + " " + print_identifier(*c.alias);
                              return r;
                            },
                            [&](const CountStarItem& c) {
                              std::string r = options_.keyword_case == KeywordCase::Upper ? "COUNT(*)" : "count(*)";
                              if (c.alias) r += " " + kw("AS") + " " + print_identifier(*c.alias);
                              return r;
                            },
                        },
                        s.items[i]);
    }
    out += " " + kw("FROM") + " " + print_qualified(s.table);
    if (s.where) out += " " + kw("WHERE") + " " + expr(*s.where, 0);
    if (!s.group_by.empty()) {
      out += " " + kw("GROUP") + " " + kw("BY") + " ";
      for (std::size_t i = 0; i < s.group_by.size(); ++i) {
        if (i) out += ", ";
        out += print_identifier(s.group_by[i]);
      }
    }
    if (!s.order_by.empty()) {
      out += " " + kw("ORDER") + " " + kw("BY") + " ";
      for (std::size_t i = 0; i < s.order_by.size(); ++i) {
        if (i) out += ", ";
        out += print_identifier(s.order_by[i].name);
        if (s.order_by[i].descending) out += " " + kw("DESC");
      }
    }
    if (s.limit) out += " " + kw("LIMIT") + " " + std::to_string(*s.limit);
    return out;
  }

  std::string insert(const Insert& s) const {
    std::string out = kw("INSERT") + " " + kw("INTO") + " " + print_qualified(s.table);
    if (!s.columns.empty()) {
      out += " (";
      for (std::size_t i = 0; i < s.columns.size(); ++i) {
        if (i) out += ", ";
        out += print_identifier(s.columns[i]);
      }
      out += ")";
    }
    out += " " + kw("VALUES") + " ";
    for (std::size_t r = 0; r < s.rows.size(); ++r) {
      if (r) out += ", ";
      out += "(";
      for (std::size_t i = 0; i < s.rows[r].size(); ++i) {
        if (i) out += ", ";
        out += print(s.rows[r][i]);
      }
      out += ")";
    }
    return out;
  }

  std::string update(const Update& s) const {
    std::string out = kw("UPDATE") + " " + print_qualified(s.table) + " " + kw("SET") + " ";
    for (std::size_t i = 0; i < s.assignments.size(); ++i) {
      if (i) out += ", ";
      out += print_identifier(s.assignments[i].column) + " = " + print(s.assignments[i].value);
    }
    if (s.where) out += " " + kw("WHERE") + " " + expr(*s.where, 0);
    return out;
  }

  // Binding strength: OR 1, AND 2, NOT 3, predicates 4.
  static int precedence(const Expr& e) {
    if (const auto* l = std::get_if<Logical>(&e.node)) return l->op == LogicalOp::Or ? 1 : 2;
    if (std::holds_alternative<Not>(e.node)) return 3;
    return 4;
  }

  // `min_prec` is the weakest binding the context accepts without parens.
  std::string expr(const Expr& e, int min_prec) const {
    std::string body = std::visit(
        Overloaded{
            [&](const Compare& c) {
              static constexpr std::array<const char*, 6> kOps = {"=", "!=", "<", "<=", ">", ">="};
              return print(c.lhs) + " " + kOps[static_cast<int>(c.op)] + " " + print(c.rhs);
            },
            [&](const Like& l) {
              return print(l.operand) + (l.negated ? " " + kw("NOT") : std::string()) + " " + kw("LIKE") +
                     " " + quote_string(l.pattern);
            },
            [&](const InList& in) {
              std::string r = print(in.operand) + (in.negated ? " " + kw("NOT") : std::string()) + " " +
                              kw("IN") + " (";
              for (std::size_t i = 0; i < in.values.size(); ++i) {
                if (i) r += ", ";
                r += print(in.values[i]);
              }
              return r + ")";
            },
            [&](const Between& b) {
              return print(b.operand) + (b.negated ? " " + kw("NOT") : std::string()) + " " + kw("BETWEEN") +
                     " " + print(b.low) + " " + kw("AND") + " " + print(b.high);
            },
            [&](const Logical& l) {
              std::string sep = " " + kw(l.op == LogicalOp::And ? "AND" : "OR") + " ";
              int own = l.op == LogicalOp::Or ? 1 : 2;
              std::string r;
              for (std::size_t i = 0; i < l.operands.size(); ++i) {
                if (i) r += sep;
                const Expr& child = l.operands[i];
                // A same-operator child is a nested group; keep it parenthesised.
                bool nested_same = precedence(child) == own;
                r += expr(child, nested_same ? own + 1 : own);
              }
              return r;
            },
            [&](const Not& n) { return kw("NOT") + " " + expr(*n.operand, 3); },
        },
        e.node);
    if (precedence(e) < min_prec) return "(" + body + ")";
    return body;
  }

 private:
  PrintOptions options_;
};

}  // namespace

std::string print_identifier(const std::string& name) {
  if (plain_word(name)) return name;
  std::string out = "`";
  for (char c : name) {
    if (c == '`') out.push_back('`');
    out.push_back(c);
  }
  return out + "`";
}

std::string print_qualified(const std::string& name) {
  std::string out;
  auto parts = split(name, '.');
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += ".";
    out += print_identifier(parts[i]);
  }
  return out;
}

std::string print(const Literal& lit) {
  return std::visit(Overloaded{
                        [](std::int64_t v) { return std::to_string(v); },
                        [](double v) { return format_double(v); },
                        [](const StringLit& s) { return quote_string(s); },
                    },
                    lit);
}

std::string print(const Operand& operand) {
  return std::visit(Overloaded{
                        [](const ColumnRef& c) { return print_identifier(c.name); },
                        [](const Literal& l) { return print(l); },
                    },
                    operand);
}

std::string print(const Statement& stmt, const PrintOptions& options) {
  return Printer(options).statement(stmt);
}

std::string print(const Expr& expr, const PrintOptions& options) {
  return Printer(options).expr(expr, 0);
}

}  // namespace streamlink::sql
