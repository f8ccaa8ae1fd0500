// Single-node reference executor. It walks the AST directly, looks columns
// up by name on every access and uses a recursive LIKE matcher, sharing no
// evaluation code with BoundQuery so the two paths can check each other.

#include <algorithm>
#include <map>

#include "streamlink/overloaded.hpp"
#include "streamlink/storage/executor.hpp"
#include "streamlink/strings.hpp"

namespace streamlink::storage {

namespace {

bool like_recursive(std::string_view s, std::string_view p) {
  if (p.empty()) return s.empty();
  if (p[0] == '%') {
    for (std::size_t i = 0; i <= s.size(); ++i) {
      if (like_recursive(s.substr(i), p.substr(1))) return true;
    }
    return false;
  }
  if (s.empty()) return false;
  if (p[0] == '_' || p[0] == s[0]) return like_recursive(s.substr(1), p.substr(1));
  return false;
}

class Reference {
 public:
  Reference(const sql::Select& select, const sql::TableDef& table) : select_(select), table_(table) {}

  ResultSet run(const std::vector<Row>& rows) const {
    std::vector<const Row*> kept;
    for (const auto& row : rows) {
      if (!select_.where || eval(*select_.where, row)) kept.push_back(&row);
    }
    bool aggregate = !select_.group_by.empty() ||
                     std::any_of(select_.items.begin(), select_.items.end(), [](const sql::SelectItem& i) {
                       return std::holds_alternative<sql::CountStarItem>(i);
                     });
    ResultSet rs;
    rs.ordered = !select_.order_by.empty();
    rs.columns = output_names();

    // Each output row carries the values ORDER BY needs and a tie-break text.
    struct Out {
      Row row;
      Row sort_values;
      std::string tie;
    };
    std::vector<Out> out;

    if (aggregate) {
      std::map<Row, std::int64_t> groups;
      for (const Row* row : kept) {
        Row key;
        for (const auto& g : select_.group_by) key.push_back(cell(*row, g));
        groups[key]++;
      }
      if (select_.group_by.empty() && groups.empty()) groups[Row{}] = 0;
      for (const auto& [key, count] : groups) {
        Out o;
        for (const auto& item : select_.items) {
          if (const auto* c = std::get_if<sql::ColumnItem>(&item)) {
            o.row.push_back(key_value(key, c->name));
          } else if (std::holds_alternative<sql::CountStarItem>(item)) {
            o.row.emplace_back(count);
          } else {
            throw StorageError("InvalidQuery", "SELECT * with aggregation");
          }
        }
        for (const auto& k : select_.order_by) o.sort_values.push_back(group_sort_value(key, count, k.name));
        o.tie = row_text(key);
        out.push_back(std::move(o));
      }
    } else {
      for (const Row* row : kept) {
        Out o;
        for (const auto& item : select_.items) {
          if (std::holds_alternative<sql::StarItem>(item)) {
            o.row.insert(o.row.end(), row->begin(), row->end());
          } else {
            o.row.push_back(cell(*row, std::get<sql::ColumnItem>(item).name));
          }
        }
        for (const auto& k : select_.order_by) o.sort_values.push_back(row_sort_value(o.row, k.name));
        o.tie = row_text(o.row);
        out.push_back(std::move(o));
      }
    }

    std::stable_sort(out.begin(), out.end(), [&](const Out& a, const Out& b) {
      for (std::size_t i = 0; i < select_.order_by.size(); ++i) {
        int c = compare(a.sort_values[i], b.sort_values[i]);
        if (select_.order_by[i].descending) c = -c;
        if (c != 0) return c < 0;
      }
      return a.tie < b.tie;
    });
    std::size_t n = out.size();
    if (select_.limit) n = std::min(n, static_cast<std::size_t>(*select_.limit));
    for (std::size_t i = 0; i < n; ++i) rs.rows.push_back(std::move(out[i].row));
    return rs;
  }

 private:
  Value cell(const Row& row, const std::string& name) const {
    for (std::size_t i = 0; i < table_.columns.size(); ++i) {
      if (iequals(table_.columns[i].name, name)) return row[i];
    }
    throw StorageError("UnknownColumn", "unknown column '" + name + "'");
  }

  Value operand(const sql::Operand& op, const Row& row) const {
    if (const auto* c = std::get_if<sql::ColumnRef>(&op)) return cell(row, c->name);
    return from_literal(std::get<sql::Literal>(op));
  }

  bool eval(const sql::Expr& e, const Row& row) const {
    return std::visit(
        Overloaded{
            [&](const sql::Compare& c) {
              int r = compare(operand(c.lhs, row), operand(c.rhs, row));
              switch (c.op) {
                case sql::CompareOp::Eq: return r == 0;
                case sql::CompareOp::Ne: return r != 0;
                case sql::CompareOp::Lt: return r < 0;
                case sql::CompareOp::Le: return r <= 0;
                case sql::CompareOp::Gt: return r > 0;
                case sql::CompareOp::Ge: return r >= 0;
              }
              return false;
            },
            [&](const sql::Like& l) {
              Value v = operand(l.operand, row);
              if (is_numeric(v)) throw StorageError("TypeError", "LIKE on a number");
              return like_recursive(std::get<std::string>(v), l.pattern.value) != l.negated;
            },
            [&](const sql::InList& in) {
              Value v = operand(in.operand, row);
              bool hit = false;
              for (const auto& lit : in.values) hit = hit || compare(v, from_literal(lit)) == 0;
              return hit != in.negated;
            },
            [&](const sql::Between& b) {
              Value v = operand(b.operand, row);
              bool inside = compare(v, operand(b.low, row)) >= 0 && compare(v, operand(b.high, row)) <= 0;
              return inside != b.negated;
            },
            [&](const sql::Logical& l) {
              if (l.op == sql::LogicalOp::And) {
                for (const auto& c : l.operands) {
                  if (!eval(c, row)) return false;
                }
                return true;
              }
              for (const auto& c : l.operands) {
                if (eval(c, row)) return true;
              }
              return false;
            },
            [&](const sql::Not& n) { return !eval(*n.operand, row); },
        },
        e.node);
  }

  std::vector<std::string> output_names() const {
    std::vector<std::string> names;
    for (const auto& item : select_.items) {
      std::visit(Overloaded{
                     [&](const sql::StarItem&) {
                       for (const auto& c : table_.columns) names.push_back(c.name);
                     },
                     [&](const sql::ColumnItem& c) {
                       names.push_back(c.alias ? *c.alias : table_.columns[*table_.column_index(c.name)].name);
                     },
                     [&](const sql::CountStarItem& c) { names.push_back(c.alias.value_or("count(*)")); },
                 },
                 item);
    }
    return names;
  }

  Value key_value(const Row& key, const std::string& column) const {
    for (std::size_t g = 0; g < select_.group_by.size(); ++g) {
      if (iequals(select_.group_by[g], column)) return key[g];
    }
    throw StorageError("InvalidQuery", "column '" + column + "' must appear in GROUP BY");
  }

  Value group_sort_value(const Row& key, std::int64_t count, const std::string& name) const {
    for (const auto& item : select_.items) {
      if (const auto* c = std::get_if<sql::CountStarItem>(&item); c && c->alias && iequals(*c->alias, name)) {
        return count;
      }
      if (const auto* c = std::get_if<sql::ColumnItem>(&item); c && c->alias && iequals(*c->alias, name)) {
        return key_value(key, c->name);
      }
    }
    return key_value(key, name);
  }

  Value row_sort_value(const Row& out_row, const std::string& name) const {
    // Alias match first, then underlying column names.
    std::size_t pos = 0;
    for (const auto& item : select_.items) {
      if (const auto* c = std::get_if<sql::ColumnItem>(&item)) {
        if (c->alias && iequals(*c->alias, name)) return out_row[pos];
        ++pos;
      } else {
        pos += table_.columns.size();
      }
    }
    pos = 0;
    for (const auto& item : select_.items) {
      if (const auto* c = std::get_if<sql::ColumnItem>(&item)) {
        if (iequals(c->name, name)) return out_row[pos];
        ++pos;
      } else {
        for (const auto& col : table_.columns) {
          if (iequals(col.name, name)) return out_row[pos];
          ++pos;
        }
      }
    }
    throw StorageError("InvalidQuery", "ORDER BY key '" + name + "' does not name an output column");
  }

  const sql::Select& select_;
  const sql::TableDef& table_;
};

}  // namespace

ResultSet reference_execute(const sql::Select& select, const sql::TableDef& table, const std::vector<Row>& rows) {
  return Reference(select, table).run(rows);
}

}  // namespace streamlink::storage
