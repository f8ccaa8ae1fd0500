#include "streamlink/storage/executor.hpp"

#include <algorithm>
#include <exception>
#include <numeric>

#include "streamlink/overloaded.hpp"
#include "streamlink/strings.hpp"

namespace streamlink::storage {

namespace {

enum class Category { Text, Number };

struct BoundOperand {
  bool is_column = false;
  std::size_t index = 0;
  Value literal;
  Category category = Category::Text;

  const Value& get(const Row& row) const { return is_column ? row[index] : literal; }
};

[[noreturn]] void invalid(const std::string& msg) { throw StorageError("InvalidQuery", msg); }

Category category_of(sql::ColumnType t) {
  return (t == sql::ColumnType::Int || t == sql::ColumnType::Float) ? Category::Number : Category::Text;
}

std::size_t column_or_throw(const sql::TableDef& table, const std::string& name) {
  auto idx = table.column_index(name);
  if (!idx) throw StorageError("UnknownColumn", "unknown column '" + name + "' in table '" + table.name + "'");
  return *idx;
}

bool satisfies(sql::CompareOp op, int c) {
  switch (op) {
    case sql::CompareOp::Eq: return c == 0;
    case sql::CompareOp::Ne: return c != 0;
    case sql::CompareOp::Lt: return c < 0;
    case sql::CompareOp::Le: return c <= 0;
    case sql::CompareOp::Gt: return c > 0;
    case sql::CompareOp::Ge: return c >= 0;
  }
  return false;
}

}  // namespace

struct BoundQuery::Predicate {
  enum Kind { Cmp, LikeOp, In, Range, And, Or, Negate } kind = Cmp;
  sql::CompareOp op = sql::CompareOp::Eq;
  BoundOperand a, b, c;
  std::string pattern;
  std::vector<Value> list;
  bool negated = false;
  std::vector<Predicate> children;

  bool eval(const Row& row) const {
    switch (kind) {
      case Cmp:
        return satisfies(op, compare(a.get(row), b.get(row)));
      case LikeOp:
        return like_match(std::get<std::string>(a.get(row)), pattern) != negated;
      case In: {
        const Value& v = a.get(row);
        bool found = std::any_of(list.begin(), list.end(), [&](const Value& x) { return compare(v, x) == 0; });
        return found != negated;
      }
      case Range: {
        const Value& v = a.get(row);
        bool inside = compare(v, b.get(row)) >= 0 && compare(v, c.get(row)) <= 0;
        return inside != negated;
      }
      case And:
        return std::all_of(children.begin(), children.end(), [&](const Predicate& p) { return p.eval(row); });
      case Or:
        return std::any_of(children.begin(), children.end(), [&](const Predicate& p) { return p.eval(row); });
      case Negate:
        return !children.front().eval(row);
    }
    return false;
  }
};

namespace {

using Predicate = BoundQuery::Predicate;

BoundOperand bind_operand(const sql::Operand& op, const sql::TableDef& table) {
  BoundOperand out;
  if (const auto* col = std::get_if<sql::ColumnRef>(&op)) {
    out.is_column = true;
    out.index = column_or_throw(table, col->name);
    out.category = category_of(table.columns[out.index].type);
  } else {
    out.literal = from_literal(std::get<sql::Literal>(op));
    out.category = is_numeric(out.literal) ? Category::Number : Category::Text;
  }
  return out;
}

void require_same(const BoundOperand& a, const BoundOperand& b, const char* what) {
  if (a.category != b.category) {
    throw StorageError("TypeError", std::string("incompatible operand types in ") + what);
  }
}

Predicate bind_expr(const sql::Expr& expr, const sql::TableDef& table) {
  return std::visit(
      Overloaded{
          [&](const sql::Compare& c) {
            Predicate p;
            p.kind = Predicate::Cmp;
            p.op = c.op;
            p.a = bind_operand(c.lhs, table);
            p.b = bind_operand(c.rhs, table);
            require_same(p.a, p.b, "comparison");
            return p;
          },
          [&](const sql::Like& l) {
            Predicate p;
            p.kind = Predicate::LikeOp;
            p.a = bind_operand(l.operand, table);
            if (p.a.category != Category::Text) throw StorageError("TypeError", "LIKE needs a text operand");
            p.pattern = l.pattern.value;
            p.negated = l.negated;
            return p;
          },
          [&](const sql::InList& in) {
            Predicate p;
            p.kind = Predicate::In;
            p.a = bind_operand(in.operand, table);
            for (const auto& v : in.values) {
              Value x = from_literal(v);
              if ((p.a.category == Category::Number) != is_numeric(x)) {
                throw StorageError("TypeError", "incompatible operand types in IN list");
              }
              p.list.push_back(std::move(x));
            }
            p.negated = in.negated;
            return p;
          },
          [&](const sql::Between& b) {
            Predicate p;
            p.kind = Predicate::Range;
            p.a = bind_operand(b.operand, table);
            p.b = bind_operand(b.low, table);
            p.c = bind_operand(b.high, table);
            require_same(p.a, p.b, "BETWEEN");
            require_same(p.a, p.c, "BETWEEN");
            p.negated = b.negated;
            return p;
          },
          [&](const sql::Logical& l) {
            Predicate p;
            p.kind = l.op == sql::LogicalOp::And ? Predicate::And : Predicate::Or;
            for (const auto& child : l.operands) p.children.push_back(bind_expr(child, table));
            return p;
          },
          [&](const sql::Not& n) {
            Predicate p;
            p.kind = Predicate::Negate;
            p.children.push_back(bind_expr(*n.operand, table));
            return p;
          },
      },
      expr.node);
}

}  // namespace

BoundQuery::BoundQuery(const sql::Select& select, const sql::TableDef& table) : select_(select) {
  if (select.items.empty()) invalid("empty projection");
  if (select.limit && *select.limit < 0) invalid("LIMIT must be non-negative");
  if (select.where) where_ = std::make_shared<const Predicate>(bind_expr(*select.where, table));

  grouped_ = !select.group_by.empty() ||
             std::any_of(select.items.begin(), select.items.end(),
                         [](const sql::SelectItem& i) { return std::holds_alternative<sql::CountStarItem>(i); });

  // Names an ORDER BY key may resolve to, per output column.
  std::vector<std::vector<std::string>> output_names;

  if (grouped_) {
    for (const auto& g : select.group_by) group_columns_.push_back(column_or_throw(table, g));
    for (const auto& item : select.items) {
      std::visit(Overloaded{
                     [&](const sql::StarItem&) { invalid("SELECT * cannot be combined with GROUP BY or COUNT(*)"); },
                     [&](const sql::ColumnItem& c) {
                       std::size_t col = column_or_throw(table, c.name);
                       auto slot = std::find(group_columns_.begin(), group_columns_.end(), col);
                       if (slot == group_columns_.end()) {
                         invalid("column '" + c.name + "' must appear in GROUP BY");
                       }
                       outputs_.push_back({OutputSource::Column, static_cast<std::size_t>(slot - group_columns_.begin())});
                       output_columns_.push_back(c.alias.value_or(table.columns[col].name));
                       std::vector<std::string> names{table.columns[col].name};
                       if (c.alias) names.push_back(*c.alias);
                       output_names.push_back(std::move(names));
                     },
                     [&](const sql::CountStarItem& c) {
                       outputs_.push_back({OutputSource::Count, 0});
                       output_columns_.push_back(c.alias.value_or("count(*)"));
                       output_names.push_back(c.alias ? std::vector<std::string>{*c.alias} : std::vector<std::string>{});
                     },
                 },
                 item);
    }
  } else {
    for (const auto& item : select.items) {
      if (std::holds_alternative<sql::StarItem>(item)) {
        for (std::size_t i = 0; i < table.columns.size(); ++i) {
          outputs_.push_back({OutputSource::Column, i});
          output_columns_.push_back(table.columns[i].name);
          output_names.push_back({table.columns[i].name});
        }
      } else {
        const auto& c = std::get<sql::ColumnItem>(item);
        std::size_t col = column_or_throw(table, c.name);
        outputs_.push_back({OutputSource::Column, col});
        output_columns_.push_back(c.alias.value_or(table.columns[col].name));
        std::vector<std::string> names{table.columns[col].name};
        if (c.alias) names.push_back(*c.alias);
        output_names.push_back(std::move(names));
      }
    }
  }

  for (const auto& key : select.order_by) {
    OrderSource src;
    src.descending = key.descending;
    bool found = false;
    // Aliases win over underlying column names.
    for (int pass = 0; pass < 2 && !found; ++pass) {
      for (std::size_t o = 0; o < output_names.size() && !found; ++o) {
        const auto& names = output_names[o];
        for (std::size_t n = 0; n < names.size() && !found; ++n) {
          bool is_alias = grouped_ ? (outputs_[o].kind == OutputSource::Count || n == 1) : n == 1;
          if ((pass == 0) != is_alias) continue;
          if (iequals(names[n], key.name)) {
            found = true;
            if (grouped_) {
              src.kind = outputs_[o].kind == OutputSource::Count ? OrderSource::Count : OrderSource::Key;
              src.index = outputs_[o].index;
            } else {
              src.kind = OrderSource::Output;
              src.index = o;
            }
          }
        }
      }
    }
    if (!found && grouped_) {
      for (std::size_t g = 0; g < select.group_by.size(); ++g) {
        if (iequals(select.group_by[g], key.name) || iequals(table.columns[group_columns_[g]].name, key.name)) {
          src.kind = OrderSource::Key;
          src.index = g;
          found = true;
          break;
        }
      }
    }
    if (!found) invalid("ORDER BY key '" + key.name + "' does not name an output column");
    order_.push_back(src);
  }
}

bool BoundQuery::matches(const Row& row) const { return !where_ || where_->eval(row); }

Row BoundQuery::project(const Row& row) const {
  Row out;
  out.reserve(outputs_.size());
  for (const auto& o : outputs_) out.push_back(row[o.index]);
  return out;
}

Row BoundQuery::group_key(const Row& row) const {
  Row key;
  key.reserve(group_columns_.size());
  for (auto c : group_columns_) key.push_back(row[c]);
  return key;
}

Row BoundQuery::group_output(const Row& key, std::int64_t count) const {
  Row out;
  out.reserve(outputs_.size());
  for (const auto& o : outputs_) {
    if (o.kind == OutputSource::Count) {
      out.emplace_back(count);
    } else {
      out.push_back(key[o.index]);
    }
  }
  return out;
}

Value BoundQuery::group_sort_value(const Row& key, std::int64_t count, const OrderSource& src) const {
  if (src.kind == OrderSource::Count) return count;
  return key[src.index];
}

int BoundQuery::order_compare(const Row& a, const Row& b) const {
  for (const auto& o : order_) {
    int c = compare(a[o.index], b[o.index]);
    if (c != 0) return o.descending ? -c : c;
  }
  return 0;
}

int BoundQuery::group_order_compare(const Row& key_a, std::int64_t count_a, const Row& key_b,
                                    std::int64_t count_b) const {
  for (const auto& o : order_) {
    int c = compare(group_sort_value(key_a, count_a, o), group_sort_value(key_b, count_b, o));
    if (c != 0) return o.descending ? -c : c;
  }
  return 0;
}

bool BoundQuery::row_less(const Row& a, const Row& b) const {
  int c = order_compare(a, b);
  return c != 0 ? c < 0 : row_text(a) < row_text(b);
}

LocalResult execute_local(const BoundQuery& query, std::span<const Row> shard_rows, bool top_k) {
  if (query.grouped()) {
    PartialAggregate partial;
    for (const auto& row : shard_rows) {
      if (query.matches(row)) ++partial.counts[query.group_key(row)];
    }
    return partial;
  }
  ResultSet rs;
  rs.columns = query.output_columns();
  rs.ordered = !query.select().order_by.empty();
  for (const auto& row : shard_rows) {
    if (query.matches(row)) rs.rows.push_back(query.project(row));
  }
  if (top_k && query.select().limit) {
    auto k = static_cast<std::size_t>(*query.select().limit);
    if (rs.rows.size() > k) {
      std::partial_sort(rs.rows.begin(), rs.rows.begin() + static_cast<std::ptrdiff_t>(k), rs.rows.end(),
                        [&](const Row& a, const Row& b) { return query.row_less(a, b); });
      rs.rows.resize(k);
    }
  }
  return rs;
}

LocalResult execute_local(const sql::Select& select, const ShardedTable& table, std::size_t shard) {
  BoundQuery query(select, table.def());
  return table.read_shard(shard, [&](const std::vector<Row>& rows) { return execute_local(query, rows); });
}

ResultSet merge_partials(std::span<const PartialAggregate> parts, const BoundQuery& query) {
  std::map<Row, std::int64_t> totals;
  for (const auto& part : parts) {
    for (const auto& [key, count] : part.counts) totals[key] += count;
  }
  // A global COUNT(*) always yields one row.
  if (query.select().group_by.empty() && totals.empty()) totals[Row{}] = 0;

  struct Group {
    Row key;
    std::int64_t count;
  };
  std::vector<Group> groups;
  groups.reserve(totals.size());
  for (auto& [key, count] : totals) groups.push_back({key, count});

  std::vector<std::pair<std::string, std::size_t>> keyed;
  keyed.reserve(groups.size());
  for (std::size_t i = 0; i < groups.size(); ++i) keyed.emplace_back(row_text(groups[i].key), i);
  std::sort(keyed.begin(), keyed.end(), [&](const auto& a, const auto& b) {
    const Group& x = groups[a.second];
    const Group& y = groups[b.second];
    int c = query.group_order_compare(x.key, x.count, y.key, y.count);
    return c != 0 ? c < 0 : a.first < b.first;
  });

  ResultSet rs;
  rs.columns = query.output_columns();
  rs.ordered = !query.select().order_by.empty();
  std::size_t limit = query.select().limit ? static_cast<std::size_t>(*query.select().limit) : keyed.size();
  for (std::size_t i = 0; i < keyed.size() && i < limit; ++i) {
    const Group& g = groups[keyed[i].second];
    rs.rows.push_back(query.group_output(g.key, g.count));
  }
  return rs;
}

ResultSet merge_partials(std::span<const PartialAggregate> parts, const sql::Select& select,
                         const sql::TableDef& table) {
  return merge_partials(parts, BoundQuery(select, table));
}

ResultSet merge_rows(std::span<const ResultSet> parts, const BoundQuery& query) {
  ResultSet rs;
  rs.columns = query.output_columns();
  rs.ordered = !query.select().order_by.empty();
  for (const auto& part : parts) rs.rows.insert(rs.rows.end(), part.rows.begin(), part.rows.end());

  std::vector<std::pair<std::string, std::size_t>> keyed;
  keyed.reserve(rs.rows.size());
  for (std::size_t i = 0; i < rs.rows.size(); ++i) keyed.emplace_back(row_text(rs.rows[i]), i);
  std::sort(keyed.begin(), keyed.end(), [&](const auto& a, const auto& b) {
    int c = query.order_compare(rs.rows[a.second], rs.rows[b.second]);
    return c != 0 ? c < 0 : a.first < b.first;
  });
  std::size_t limit = query.select().limit ? static_cast<std::size_t>(*query.select().limit) : keyed.size();
  std::vector<Row> out;
  out.reserve(std::min(limit, keyed.size()));
  for (std::size_t i = 0; i < keyed.size() && i < limit; ++i) out.push_back(std::move(rs.rows[keyed[i].second]));
  rs.rows = std::move(out);
  return rs;
}

ResultSet scatter_gather(const BoundQuery& query, std::size_t shard_count, const ShardTask& run_shard,
                         bool parallel) {
  const auto n = static_cast<long>(shard_count);
  std::vector<LocalResult> results(shard_count);
  std::vector<std::exception_ptr> errors(shard_count);

#pragma omp parallel for schedule(dynamic) if (parallel && n > 1)
  for (long s = 0; s < n; ++s) {
    auto idx = static_cast<std::size_t>(s);
    try {
      results[idx] = run_shard(idx);
    } catch (...) {
      errors[idx] = std::current_exception();
    }
  }

  std::size_t failed = 0;
  std::exception_ptr first;
  for (auto& e : errors) {
    if (e) {
      ++failed;
      if (!first) first = e;
    }
  }
  if (failed == errors.size() && failed > 1) {
    try {
      std::rethrow_exception(first);
    } catch (const std::exception& e) {
      throw StorageError("AllShardsFailed", "all " + std::to_string(failed) + " shards failed: " + e.what());
    }
  }
  if (first) std::rethrow_exception(first);

  if (query.grouped()) {
    std::vector<PartialAggregate> parts;
    parts.reserve(results.size());
    for (auto& r : results) parts.push_back(std::get<PartialAggregate>(std::move(r)));
    return merge_partials(parts, query);
  }
  std::vector<ResultSet> parts;
  parts.reserve(results.size());
  for (auto& r : results) parts.push_back(std::get<ResultSet>(std::move(r)));
  return merge_rows(parts, query);
}

ResultSet execute_distributed(const sql::Select& select, const ShardedTable& table,
                              const DistributedOptions& options) {
  BoundQuery query(select, table.def());
  const bool top_k = options.top_k_pushdown;
  return scatter_gather(
      query, table.shard_count(),
      [&](std::size_t shard) {
        return table.read_shard(shard, [&](const std::vector<Row>& rows) { return execute_local(query, rows, top_k); });
      },
      options.parallel);
}

ResultSet execute(const sql::Select& select, const Database& db, const DistributedOptions& options) {
  return execute_distributed(select, db.table(select.table), options);
}

}  // namespace streamlink::storage
