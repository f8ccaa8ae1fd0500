#include "streamlink/sql/schema.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "streamlink/strings.hpp"

namespace streamlink::sql {

std::string_view to_string(ColumnType t) {
  switch (t) {
    case ColumnType::Text: return "text";
    case ColumnType::Int: return "int";
    case ColumnType::Float: return "float";
    case ColumnType::Date: return "date";
  }
  return "text";
}

std::optional<ColumnType> parse_column_type(std::string_view name) {
  std::string n = to_lower(name);
  if (n == "text" || n == "string") return ColumnType::Text;
  if (n == "int" || n == "integer") return ColumnType::Int;
  if (n == "float" || n == "real" || n == "double") return ColumnType::Float;
  if (n == "date" || n == "date-text") return ColumnType::Date;
  return std::nullopt;
}

std::optional<std::size_t> TableDef::column_index(std::string_view name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (iequals(columns[i].name, name)) return i;
  }
  return std::nullopt;
}

const Column* TableDef::find_column(std::string_view name) const {
  auto idx = column_index(name);
  return idx ? &columns[*idx] : nullptr;
}

void Schema::add_table(TableDef table) {
  if (table.columns.empty()) {
    throw SchemaError("SchemaInvalid", "table '" + table.name + "' has no columns");
  }
  if (find_table(table.name) != nullptr) {
    throw SchemaError("SchemaInvalid", "duplicate table '" + table.name + "'");
  }
  for (std::size_t i = 0; i < table.columns.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (iequals(table.columns[i].name, table.columns[j].name)) {
        throw SchemaError("SchemaInvalid",
                          "duplicate column '" + table.columns[i].name + "' in table '" + table.name + "'");
      }
    }
  }
  tables_.push_back(std::move(table));
}

const TableDef* Schema::find_table(std::string_view name) const {
  for (const auto& t : tables_) {
    if (iequals(t.name, name)) return &t;
  }
  return nullptr;
}

const TableDef& Schema::table(std::string_view name) const {
  const TableDef* t = find_table(name);
  if (t == nullptr) throw SchemaError("UnknownTable", "unknown table '" + std::string(name) + "'");
  return *t;
}

Schema Schema::from_json(std::string_view json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError("SchemaInvalid", std::string("schema is not valid JSON: ") + e.what());
  }
  Schema schema;
  if (!doc.contains("tables") || !doc["tables"].is_array()) {
    throw SchemaError("SchemaInvalid", "schema needs a 'tables' array");
  }
  try {
    for (const auto& t : doc["tables"]) {
      TableDef def;
      def.name = t.at("name").get<std::string>();
      for (const auto& c : t.at("columns")) {
        std::string type_name = c.value("type", "text");
        auto type = parse_column_type(type_name);
        if (!type) throw SchemaError("SchemaInvalid", "unknown column type '" + type_name + "'");
        def.columns.push_back({c.at("name").get<std::string>(), *type});
      }
      schema.add_table(std::move(def));
    }
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError("SchemaInvalid", std::string("malformed schema: ") + e.what());
  }
  return schema;
}

Schema Schema::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("IoError", "cannot open schema file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return from_json(buf.str());
}

std::string Schema::to_json() const {
  nlohmann::ordered_json doc;
  doc["tables"] = nlohmann::ordered_json::array();
  for (const auto& t : tables_) {
    nlohmann::ordered_json cols = nlohmann::ordered_json::array();
    for (const auto& c : t.columns) cols.push_back({{"name", c.name}, {"type", std::string(to_string(c.type))}});
    doc["tables"].push_back({{"name", t.name}, {"columns", cols}});
  }
  return doc.dump(2);
}

}  // namespace streamlink::sql
