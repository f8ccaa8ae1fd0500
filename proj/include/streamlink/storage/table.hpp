#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include "streamlink/sql/schema.hpp"
#include "streamlink/storage/value.hpp"

namespace streamlink::storage {

// Deterministic shard assignment: FNV-1a 64 of the printed key, modulo n.
std::size_t shard_of(const Value& key, std::size_t shard_count);

// A table hash-partitioned on one key column. Reads take a shared lock,
// ingestion an exclusive one, so readers never see a half-applied batch.
class ShardedTable {
 public:
  ShardedTable(sql::TableDef def, std::size_t shard_count, std::string key_column);

  const sql::TableDef& def() const { return def_; }
  std::size_t shard_count() const { return shard_count_; }
  const std::string& key_column() const { return def_.columns[key_index_].name; }
  std::size_t key_index() const { return key_index_; }

  // Rows must already be typed against the schema.
  std::size_t insert(std::vector<Row> rows);

  std::vector<std::size_t> shard_sizes() const;
  std::size_t row_count() const;

  // Copies of the data, taken under the shared lock.
  std::vector<Row> shard_rows(std::size_t shard) const;
  std::vector<Row> all_rows() const;

  // Runs `fn(const std::vector<Row>&)` against one shard under the shared lock.
  template <class Fn>
  auto read_shard(std::size_t shard, Fn&& fn) const {
    std::shared_lock lock(mutex_);
    return fn(shards_.at(shard));
  }

  // Replaces a shard's contents; used when restoring snapshots. Rows whose
  // key does not hash to `shard` are rejected.
  void restore_shard(std::size_t shard, std::vector<Row> rows);

 private:
  sql::TableDef def_;
  std::size_t shard_count_;
  std::size_t key_index_;
  mutable std::shared_mutex mutex_;
  std::vector<std::vector<Row>> shards_;
};

enum class SourceFormat { Csv, JsonLines };

// Converts a text field to a typed value for `column`; throws SchemaMismatch.
Value parse_field(const sql::Column& column, std::string_view text, std::size_t row_number);

// The schema plus one ShardedTable per ingested table.
class Database {
 public:
  Database(sql::Schema schema, std::size_t shard_count);

  const sql::Schema& schema() const { return schema_; }
  std::size_t shard_count() const { return shard_count_; }

  // Parses, type-checks and partitions rows. CSV needs a header row naming
  // every schema column (any order). JSON-lines needs one object per line
  // with every column present. All-or-nothing: a bad row aborts the batch.
  // Errors: UnknownTable, UnknownColumn, SchemaMismatch.
  std::size_t ingest(std::string_view table, SourceFormat format, std::istream& in,
                     std::string_view key_column);
  std::size_t ingest_file(std::string_view table, const std::filesystem::path& path,
                          std::string_view key_column);

  std::size_t ingest_rows(std::string_view table, std::vector<Row> rows, std::string_view key_column);

  const ShardedTable& table(std::string_view name) const;  // throws UnknownTable
  bool has_table(std::string_view name) const;

 private:
  ShardedTable& table_for_ingest(std::string_view name, std::string_view key_column);

  sql::Schema schema_;
  std::size_t shard_count_;
  std::map<std::string, std::unique_ptr<ShardedTable>> tables_;  // lower-cased name
};

// Minimal RFC 4180 reader: quoted fields, doubled quotes, CRLF tolerated.
std::vector<std::vector<std::string>> read_csv(std::istream& in);
std::string csv_escape(std::string_view field);

}  // namespace streamlink::storage
