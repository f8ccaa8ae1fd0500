#include "streamlink/gen/prompt.hpp"

#include <fstream>

#include <json.hpp>

#include "streamlink/gen/generator.hpp"
#include "streamlink/sql/parser.hpp"
#include "streamlink/storage/executor.hpp"
#include "streamlink/strings.hpp"

namespace streamlink::gen {

void GenerationRequest::validate() const {
  if (trim(nl_query).empty()) throw GenerateError("InvalidArgument", "empty natural-language query");
  if (schema == nullptr) throw GenerateError("InvalidArgument", "generation request without a schema");
}

std::string serialize_schema(const sql::Schema& schema) {
  std::string out;
  for (const auto& t : schema.tables()) {
    out += t.name + "(";
    for (std::size_t i = 0; i < t.columns.size(); ++i) {
      if (i) out += ", ";
      out += t.columns[i].name + " " + std::string(sql::to_string(t.columns[i].type));
    }
    out += ")\n";
  }
  return out;
}

namespace {

void check_exemplar(const sql::Schema& schema, const Exemplar& ex, std::size_t index) {
  auto fail = [&](const std::string& why) {
    throw GenerateError("ExemplarInvalid", "exemplar " + std::to_string(index + 1) + " (\"" + ex.nl + "\" -> \"" +
                                               ex.sql + "\"): " + why);
  };
  if (trim(ex.nl).empty()) fail("empty question");
  try {
    sql::Statement stmt = sql::parse(ex.sql);
    if (!stmt.is<sql::Select>()) fail("only SELECT exemplars are allowed");
    const auto& select = stmt.as<sql::Select>();
    const sql::TableDef* table = schema.find_table(select.table);
    if (table == nullptr) fail("unknown table '" + select.table + "'");
    storage::BoundQuery(select, *table);
  } catch (const GenerateError&) {
    throw;
  } catch (const Error& e) {
    fail(e.what());
  }
}

}  // namespace

PromptTemplate build_prompt(const sql::Schema& schema, std::span<const Exemplar> exemplars,
                            std::string_view nl_query) {
  for (std::size_t i = 0; i < exemplars.size(); ++i) check_exemplar(schema, exemplars[i], i);

  std::string text;
  text += "### Task\n";
  text += "Write one SQL query that answers the request, using only the tables and columns below.\n";
  text += "Quote text values with single quotes. Reply with the SQL inside a ```sql block and nothing else.\n\n";
  text += "### Schema\n";
  text += serialize_schema(schema);
  if (!exemplars.empty()) {
    text += "\n### Examples\n";
    for (const auto& ex : exemplars) {
      text += "Request: " + ex.nl + "\n";
      text += "SQL: " + ex.sql + "\n";
    }
  }
  text += "\n### Request\n";
  text += std::string(nl_query) + "\n";
  text += "SQL:\n";
  return {text};
}

std::vector<Exemplar> load_exemplars(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw GenerateError("IoError", "cannot open exemplar file " + path);
  std::vector<Exemplar> out;
  try {
    auto doc = nlohmann::json::parse(in);
    for (const auto& item : doc) out.push_back({item.at("nl").get<std::string>(), item.at("sql").get<std::string>()});
  } catch (const nlohmann::json::exception& e) {
    throw GenerateError("ConfigInvalid", "bad exemplar file " + path + ": " + e.what());
  }
  return out;
}

}  // namespace streamlink::gen
