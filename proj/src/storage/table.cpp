#include "streamlink/storage/table.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <mutex>

#include <json.hpp>

#include "streamlink/strings.hpp"

namespace streamlink::storage {

namespace {

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

bool valid_date_text(std::string_view s) {
  auto digits = [&](std::size_t from, std::size_t n) {
    for (std::size_t i = from; i < from + n; ++i) {
      if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
    }
    return true;
  };
  if (s.size() == 4) return digits(0, 4);
  if (s.size() == 7) return digits(0, 4) && s[4] == '-' && digits(5, 2);
  if (s.size() == 10) return digits(0, 4) && s[4] == '-' && digits(5, 2) && s[7] == '-' && digits(8, 2);
  return false;
}

[[noreturn]] void mismatch(std::size_t row_number, const std::string& what) {
  throw StorageError("SchemaMismatch", "row " + std::to_string(row_number) + ": " + what);
}

}  // namespace

std::size_t shard_of(const Value& key, std::size_t shard_count) {
  return static_cast<std::size_t>(fnv1a64(to_text(key)) % shard_count);
}

ShardedTable::ShardedTable(sql::TableDef def, std::size_t shard_count, std::string key_column)
    : def_(std::move(def)), shard_count_(shard_count), shards_(shard_count) {
  if (shard_count_ == 0) throw StorageError("InvalidArgument", "shard count must be >= 1");
  auto idx = def_.column_index(key_column);
  if (!idx) {
    throw StorageError("UnknownColumn", "unknown key column '" + key_column + "' in table '" + def_.name + "'");
  }
  key_index_ = *idx;
}

std::size_t ShardedTable::insert(std::vector<Row> rows) {
  std::vector<std::vector<Row>> staged(shard_count_);
  for (auto& row : rows) {
    std::size_t s = shard_of(row[key_index_], shard_count_);
    staged[s].push_back(std::move(row));
  }
  std::unique_lock lock(mutex_);
  std::size_t n = 0;
  for (std::size_t s = 0; s < shard_count_; ++s) {
    n += staged[s].size();
    // Copy rather than move so each shard's strings are allocated together.
    for (const auto& row : staged[s]) shards_[s].push_back(row);
  }
  return n;
}

std::vector<std::size_t> ShardedTable::shard_sizes() const {
  std::shared_lock lock(mutex_);
  std::vector<std::size_t> sizes;
  for (const auto& s : shards_) sizes.push_back(s.size());
  return sizes;
}

std::size_t ShardedTable::row_count() const {
  std::size_t n = 0;
  for (auto s : shard_sizes()) n += s;
  return n;
}

std::vector<Row> ShardedTable::shard_rows(std::size_t shard) const {
  std::shared_lock lock(mutex_);
  return shards_.at(shard);
}

std::vector<Row> ShardedTable::all_rows() const {
  std::shared_lock lock(mutex_);
  std::vector<Row> out;
  for (const auto& s : shards_) out.insert(out.end(), s.begin(), s.end());
  return out;
}

void ShardedTable::restore_shard(std::size_t shard, std::vector<Row> rows) {
  if (shard >= shard_count_) throw StorageError("InvalidArgument", "shard id out of range");
  for (const auto& row : rows) {
    if (row.size() != def_.columns.size()) throw StorageError("SchemaMismatch", "snapshot row arity mismatch");
    if (shard_of(row[key_index_], shard_count_) != shard) {
      throw StorageError("SchemaMismatch", "snapshot row does not belong to shard " + std::to_string(shard));
    }
  }
  std::unique_lock lock(mutex_);
  shards_[shard] = std::move(rows);
}

Value parse_field(const sql::Column& column, std::string_view text, std::size_t row_number) {
  if (text.empty()) mismatch(row_number, "empty value for column '" + column.name + "'");
  switch (column.type) {
    case sql::ColumnType::Text:
      return std::string(text);
    case sql::ColumnType::Date:
      if (!valid_date_text(text)) {
        mismatch(row_number, "column '" + column.name + "' expects YYYY[-MM[-DD]], got '" + std::string(text) + "'");
      }
      return std::string(text);
    case sql::ColumnType::Int: {
      std::int64_t v = 0;
      auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
      if (ec != std::errc() || ptr != text.data() + text.size()) {
        mismatch(row_number, "column '" + column.name + "' expects an integer, got '" + std::string(text) + "'");
      }
      return v;
    }
    case sql::ColumnType::Float: {
      try {
        std::size_t used = 0;
        double v = std::stod(std::string(text), &used);
        if (used == text.size() && std::isfinite(v)) return v;
      } catch (const std::exception&) {
      }
      mismatch(row_number, "column '" + column.name + "' expects a number, got '" + std::string(text) + "'");
    }
  }
  mismatch(row_number, "unsupported column type");
}

std::vector<std::vector<std::string>> read_csv(std::istream& in) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  char c = 0;
  auto end_field = [&] {
    record.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_record = [&] {
    end_field();
    if (!(record.size() == 1 && record[0].empty())) records.push_back(std::move(record));
    record.clear();
  };
  while (in.get(c)) {
    if (in_quotes) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          field.push_back('"');
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    if (c == '"' && !field_started) {
      in_quotes = true;
      field_started = true;
    } else if (c == ',') {
      end_field();
    } else if (c == '\n') {
      end_record();
    } else if (c == '\r') {
      if (in.peek() == '\n') in.get(c);
      end_record();
    } else {
      field.push_back(c);
      field_started = true;
    }
  }
  if (in_quotes) throw StorageError("SchemaMismatch", "unterminated quoted CSV field");
  if (field_started || !record.empty()) end_record();
  return records;
}

std::string csv_escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  return out + "\"";
}

Database::Database(sql::Schema schema, std::size_t shard_count)
    : schema_(std::move(schema)), shard_count_(shard_count) {
  if (shard_count_ == 0) throw StorageError("InvalidArgument", "shard count must be >= 1");
}

ShardedTable& Database::table_for_ingest(std::string_view name, std::string_view key_column) {
  const sql::TableDef* def = schema_.find_table(name);
  if (def == nullptr) throw StorageError("UnknownTable", "unknown table '" + std::string(name) + "'");
  if (!def->column_index(key_column)) {
    throw StorageError("UnknownColumn", "unknown key column '" + std::string(key_column) + "'");
  }
  auto key = to_lower(def->name);
  auto it = tables_.find(key);
  if (it == tables_.end()) {
    it = tables_.emplace(key, std::make_unique<ShardedTable>(*def, shard_count_, std::string(key_column))).first;
  } else if (!iequals(it->second->key_column(), key_column)) {
    throw StorageError("SchemaMismatch", "table '" + def->name + "' is already partitioned on '" +
                                             it->second->key_column() + "'");
  }
  return *it->second;
}

std::size_t Database::ingest_rows(std::string_view table, std::vector<Row> rows, std::string_view key_column) {
  ShardedTable& t = table_for_ingest(table, key_column);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != t.def().columns.size()) {
      mismatch(i + 1, "expected " + std::to_string(t.def().columns.size()) + " fields, got " +
                          std::to_string(rows[i].size()));
    }
    for (std::size_t c = 0; c < rows[i].size(); ++c) {
      const auto& col = t.def().columns[c];
      Value& v = rows[i][c];
      switch (col.type) {
        case sql::ColumnType::Int:
          if (!std::holds_alternative<std::int64_t>(v)) mismatch(i + 1, "column '" + col.name + "' expects an integer");
          break;
        case sql::ColumnType::Float:
          if (const auto* n = std::get_if<std::int64_t>(&v)) v = static_cast<double>(*n);
          if (!std::holds_alternative<double>(v) || !std::isfinite(std::get<double>(v))) {
            mismatch(i + 1, "column '" + col.name + "' expects a number");
          }
          break;
        default:
          if (!std::holds_alternative<std::string>(v)) mismatch(i + 1, "column '" + col.name + "' expects text");
          parse_field(col, std::get<std::string>(v), i + 1);
      }
    }
  }
  return t.insert(std::move(rows));
}

std::size_t Database::ingest(std::string_view table, SourceFormat format, std::istream& in,
                             std::string_view key_column) {
  ShardedTable& t = table_for_ingest(table, key_column);
  const auto& columns = t.def().columns;
  std::vector<Row> rows;

  if (format == SourceFormat::Csv) {
    auto records = read_csv(in);
    if (records.empty()) return 0;
    const auto& header = records.front();
    std::vector<std::size_t> field_for_column(columns.size(), header.size());
    for (std::size_t f = 0; f < header.size(); ++f) {
      auto idx = t.def().column_index(trim(header[f]));
      if (!idx) throw StorageError("UnknownColumn", "unknown column '" + header[f] + "' in CSV header");
      field_for_column[*idx] = f;
    }
    for (std::size_t c = 0; c < columns.size(); ++c) {
      if (field_for_column[c] == header.size()) {
        throw StorageError("SchemaMismatch", "CSV header lacks column '" + columns[c].name + "'");
      }
    }
    for (std::size_t r = 1; r < records.size(); ++r) {
      const auto& rec = records[r];
      if (rec.size() != header.size()) {
        mismatch(r, "expected " + std::to_string(header.size()) + " fields, got " + std::to_string(rec.size()));
      }
      Row row;
      row.reserve(columns.size());
      for (std::size_t c = 0; c < columns.size(); ++c) row.push_back(parse_field(columns[c], rec[field_for_column[c]], r));
      rows.push_back(std::move(row));
    }
  } else {
    std::string line;
    std::size_t row_number = 0;
    while (std::getline(in, line)) {
      if (trim(line).empty()) continue;
      ++row_number;
      nlohmann::json obj;
      try {
        obj = nlohmann::json::parse(line);
      } catch (const nlohmann::json::exception&) {
        mismatch(row_number, "not a JSON object");
      }
      if (!obj.is_object()) mismatch(row_number, "not a JSON object");
      for (const auto& [k, v] : obj.items()) {
        if (!t.def().column_index(k)) throw StorageError("UnknownColumn", "unknown column '" + k + "'");
      }
      Row row;
      for (const auto& col : columns) {
        const nlohmann::json* field = nullptr;
        for (const auto& [k, v] : obj.items()) {
          if (iequals(k, col.name)) field = &v;
        }
        if (field == nullptr || field->is_null()) mismatch(row_number, "missing value for column '" + col.name + "'");
        if (field->is_string()) {
          row.push_back(parse_field(col, field->get<std::string>(), row_number));
        } else if (field->is_number_integer() && col.type == sql::ColumnType::Int) {
          row.emplace_back(field->get<std::int64_t>());
        } else if (field->is_number() && col.type == sql::ColumnType::Float) {
          row.emplace_back(field->get<double>());
        } else {
          mismatch(row_number, "value for column '" + col.name + "' has the wrong JSON type");
        }
      }
      rows.push_back(std::move(row));
    }
  }
  return t.insert(std::move(rows));
}

std::size_t Database::ingest_file(std::string_view table, const std::filesystem::path& path,
                                  std::string_view key_column) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw StorageError("IoError", "cannot open " + path.string());
  auto ext = to_lower(path.extension().string());
  SourceFormat format = (ext == ".jsonl" || ext == ".ndjson" || ext == ".json") ? SourceFormat::JsonLines
                                                                                  : SourceFormat::Csv;
  return ingest(table, format, in, key_column);
}

const ShardedTable& Database::table(std::string_view name) const {
  auto it = tables_.find(to_lower(name));
  if (it == tables_.end()) {
    if (schema_.find_table(name) != nullptr) {
      throw StorageError("UnknownTable", "table '" + std::string(name) + "' has no data loaded");
    }
    throw StorageError("UnknownTable", "unknown table '" + std::string(name) + "'");
  }
  return *it->second;
}

bool Database::has_table(std::string_view name) const { return tables_.count(to_lower(name)) != 0; }

}  // namespace streamlink::storage
