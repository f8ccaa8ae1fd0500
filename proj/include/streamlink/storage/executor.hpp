#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "streamlink/sql/ast.hpp"
#include "streamlink/storage/table.hpp"
#include "streamlink/storage/value.hpp"

namespace streamlink::storage {

struct ResultSet {
  std::vector<std::string> columns;
  std::vector<Row> rows;
  bool ordered = false;  // the query had ORDER BY
  bool operator==(const ResultSet&) const = default;
};

// Per-shard group counts. The key has one value per GROUP BY column (empty
// for a global COUNT(*)).
struct PartialAggregate {
  std::map<Row, std::int64_t> counts;
  bool operator==(const PartialAggregate&) const = default;
};

using LocalResult = std::variant<ResultSet, PartialAggregate>;

// A SELECT resolved against a table definition. Construction validates
// every column reference and operand type (UnknownColumn, TypeError,
// InvalidQuery) so execution itself cannot fail per row.
class BoundQuery {
 public:
  BoundQuery(const sql::Select& select, const sql::TableDef& table);

  bool grouped() const { return grouped_; }
  const std::vector<std::string>& output_columns() const { return output_columns_; }
  const sql::Select& select() const { return select_; }

  bool matches(const Row& row) const;

  // Non-grouped: projected row. Grouped: group key.
  Row project(const Row& row) const;
  Row group_key(const Row& row) const;

  // ORDER BY comparison only (0 on ties); callers break ties by printed form.
  int order_compare(const Row& a, const Row& b) const;
  int group_order_compare(const Row& key_a, std::int64_t count_a, const Row& key_b, std::int64_t count_b) const;
  // Total order on output rows: ORDER BY, then printed row.
  bool row_less(const Row& a, const Row& b) const;
  Row group_output(const Row& key, std::int64_t count) const;

  struct Predicate;

 private:
  struct OutputSource {
    enum Kind { Column, Count } kind = Column;
    std::size_t index = 0;  // table column (non-grouped) or key slot (grouped)
  };
  struct OrderSource {
    enum Kind { Output, Key, Count } kind = Output;
    std::size_t index = 0;
    bool descending = false;
  };

  Value group_sort_value(const Row& key, std::int64_t count, const OrderSource& src) const;

  sql::Select select_;
  bool grouped_ = false;
  std::vector<std::string> output_columns_;
  std::vector<OutputSource> outputs_;
  std::vector<std::size_t> group_columns_;
  std::vector<OrderSource> order_;
  std::shared_ptr<const Predicate> where_;
};

// Filter and project (or partially aggregate) one shard. Global ORDER BY and
// LIMIT are left to merge, except `top_k` pre-truncation of a non-grouped
// ordered result, which is safe because the row order is total.
LocalResult execute_local(const BoundQuery& query, std::span<const Row> shard_rows, bool top_k = false);
LocalResult execute_local(const sql::Select& select, const ShardedTable& table, std::size_t shard);

// Sums per-key counts, applies ORDER BY (ties by printed group key), then LIMIT.
ResultSet merge_partials(std::span<const PartialAggregate> parts, const BoundQuery& query);
ResultSet merge_partials(std::span<const PartialAggregate> parts, const sql::Select& select,
                         const sql::TableDef& table);
// Concatenates per-shard rows and applies ORDER BY (or canonical order) and LIMIT.
ResultSet merge_rows(std::span<const ResultSet> parts, const BoundQuery& query);

struct DistributedOptions {
  bool parallel = true;  // OpenMP scatter across shards
  bool top_k_pushdown = true;
};

using ShardTask = std::function<LocalResult(std::size_t shard)>;

// Runs `run_shard` for every shard (OpenMP-parallel when enabled), gathers
// and merges. A single failing shard rethrows its error; when every shard of
// a multi-shard table fails the error is AllShardsFailed.
ResultSet scatter_gather(const BoundQuery& query, std::size_t shard_count, const ShardTask& run_shard,
                         bool parallel = true);

// scatter_gather over the table's shards with execute_local.
ResultSet execute_distributed(const sql::Select& select, const ShardedTable& table,
                              const DistributedOptions& options = {});
ResultSet execute(const sql::Select& select, const Database& db, const DistributedOptions& options = {});

// Straightforward single-node executor over a plain row vector, written
// independently of the sharded path and kept as the test oracle.
ResultSet reference_execute(const sql::Select& select, const sql::TableDef& table, const std::vector<Row>& rows);

}  // namespace streamlink::storage
