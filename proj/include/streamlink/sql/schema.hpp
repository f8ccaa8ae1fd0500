#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "streamlink/error.hpp"

namespace streamlink::sql {

enum class ColumnType { Text, Int, Float, Date };

std::string_view to_string(ColumnType t);
std::optional<ColumnType> parse_column_type(std::string_view name);

struct Column {
  std::string name;
  ColumnType type = ColumnType::Text;
  bool operator==(const Column&) const = default;
};

struct TableDef {
  std::string name;
  std::vector<Column> columns;  // non-empty, unique case-insensitively

  std::optional<std::size_t> column_index(std::string_view name) const;
  const Column* find_column(std::string_view name) const;
  bool operator==(const TableDef&) const = default;
};

class SchemaError : public Error {
 public:
  using Error::Error;
};

// Tables in registration order; names are case-insensitive.
class Schema {
 public:
  void add_table(TableDef table);
  const TableDef* find_table(std::string_view name) const;
  const TableDef& table(std::string_view name) const;  // throws SchemaError "UnknownTable"
  const std::vector<TableDef>& tables() const { return tables_; }

  // {"tables": [{"name": "...", "columns": [{"name": "...", "type": "text"}]}]}
  static Schema from_json(std::string_view json_text);
  static Schema load(const std::filesystem::path& path);
  std::string to_json() const;

 private:
  std::vector<TableDef> tables_;
};

}  // namespace streamlink::sql
