#include "streamlink/sql/normalize.hpp"

#include <algorithm>

#include "streamlink/sql/printer.hpp"
#include "streamlink/overloaded.hpp"
#include "streamlink/strings.hpp"

namespace streamlink::sql {

namespace {

Literal norm(Literal lit) {
  if (auto* s = std::get_if<StringLit>(&lit)) s->quote = QuoteStyle::Single;
  return lit;
}

Operand norm(Operand op) {
  if (auto* c = std::get_if<ColumnRef>(&op)) {
    c->name = to_lower(c->name);
  } else {
    op = norm(std::get<Literal>(std::move(op)));
  }
  return op;
}

std::optional<std::string> norm(const std::optional<std::string>& name) {
  if (!name) return std::nullopt;
  return to_lower(*name);
}

Select norm(const Select& in) {
  Select s;
  for (const auto& item : in.items) {
    s.items.push_back(std::visit(Overloaded{
                                     [](const StarItem& i) -> SelectItem { return i; },
                                     [](const ColumnItem& i) -> SelectItem {
                                       return ColumnItem{to_lower(i.name), norm(i.alias)};
                                     },
                                     [](const CountStarItem& i) -> SelectItem {
                                       return CountStarItem{norm(i.alias)};
                                     },
                                 },
                                 item));
  }
  s.table = to_lower(in.table);
  if (in.where) s.where = normalize(*in.where);
  for (const auto& g : in.group_by) s.group_by.push_back(to_lower(g));
  for (const auto& k : in.order_by) s.order_by.push_back({to_lower(k.name), k.descending});
  s.limit = in.limit;
  return s;
}

}  // namespace

Expr normalize(const Expr& expr) {
  return std::visit(
      Overloaded{
          [](const Compare& c) { return Expr{Compare{c.op, norm(c.lhs), norm(c.rhs), c.span}}; },
          [](const Like& l) {
            return Expr{Like{norm(l.operand), StringLit{l.pattern.value, QuoteStyle::Single}, l.negated, l.span}};
          },
          [](const InList& in) {
            InList out{norm(in.operand), {}, in.negated, in.span};
            for (const auto& v : in.values) out.values.push_back(norm(v));
            return Expr{std::move(out)};
          },
          [](const Between& b) {
            return Expr{Between{norm(b.operand), norm(b.low), norm(b.high), b.negated, b.span}};
          },
          [](const Logical& l) {
            Logical out{l.op, {}};
            for (const auto& child : l.operands) {
              Expr n = normalize(child);
              if (auto* inner = std::get_if<Logical>(&n.node); inner != nullptr && inner->op == l.op) {
                for (auto& grand : inner->operands) out.operands.push_back(std::move(grand));
              } else {
                out.operands.push_back(std::move(n));
              }
            }
            PrintOptions lower{KeywordCase::Lower};
            std::vector<std::pair<std::string, Expr>> keyed;
            keyed.reserve(out.operands.size());
            for (auto& e : out.operands) keyed.emplace_back(print(e, lower), std::move(e));
            std::stable_sort(keyed.begin(), keyed.end(),
                             [](const auto& a, const auto& b) { return a.first < b.first; });
            out.operands.clear();
            for (auto& [key, e] : keyed) out.operands.push_back(std::move(e));
            return Expr{std::move(out)};
          },
          [](const Not& n) { return Expr{Not{normalize(*n.operand)}}; },
      },
      expr.node);
}

Statement normalize(const Statement& stmt) {
  return std::visit(
      Overloaded{
          [](const Select& s) { return Statement{norm(s)}; },
          [](const Insert& s) {
            Insert out{to_lower(s.table), {}, {}};
            for (const auto& c : s.columns) out.columns.push_back(to_lower(c));
            for (const auto& row : s.rows) {
              std::vector<Literal> r;
              for (const auto& v : row) r.push_back(norm(v));
              out.rows.push_back(std::move(r));
            }
            return Statement{std::move(out)};
          },
          [](const Update& s) {
            Update out{to_lower(s.table), {}, std::nullopt};
            for (const auto& a : s.assignments) out.assignments.push_back({to_lower(a.column), norm(a.value)});
            if (s.where) out.where = normalize(*s.where);
            return Statement{std::move(out)};
          },
          [](const Delete& s) {
            Delete out{to_lower(s.table), std::nullopt};
            if (s.where) out.where = normalize(*s.where);
            return Statement{std::move(out)};
          },
          [](const Drop& s) { return Statement{Drop{to_lower(s.table), s.if_exists}}; },
          [](const Union& u) {
            Union out;
            for (const auto& s : u.selects) out.selects.push_back(norm(s));
            out.all = u.all;
            return Statement{std::move(out)};
          },
          [](const Stacked& s) {
            Stacked out;
            for (const auto& inner : s.statements) out.statements.push_back(normalize(inner));
            return Statement{std::move(out)};
          },
      },
      stmt.node);
}

std::string canonical_text(const Statement& stmt) {
  return print(normalize(stmt), PrintOptions{KeywordCase::Lower});
}

std::string_view to_string(StatementClass c) {
  switch (c) {
    case StatementClass::Select: return "select";
    case StatementClass::Insert: return "insert";
    case StatementClass::Update: return "update";
    case StatementClass::Delete: return "delete";
    case StatementClass::Drop: return "drop";
  }
  return "unknown";
}

std::vector<StatementClass> statement_classes(const Statement& stmt) {
  return std::visit(Overloaded{
                        [](const Select&) { return std::vector{StatementClass::Select}; },
                        [](const Union&) { return std::vector{StatementClass::Select}; },
                        [](const Insert&) { return std::vector{StatementClass::Insert}; },
                        [](const Update&) { return std::vector{StatementClass::Update}; },
                        [](const Delete&) { return std::vector{StatementClass::Delete}; },
                        [](const Drop&) { return std::vector{StatementClass::Drop}; },
                        [](const Stacked& s) {
                          std::vector<StatementClass> out;
                          for (const auto& inner : s.statements) {
                            auto sub = statement_classes(inner);
                            out.insert(out.end(), sub.begin(), sub.end());
                          }
                          return out;
                        },
                    },
                    stmt.node);
}

}  // namespace streamlink::sql
