#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "streamlink/gen/generator.hpp"
#include "streamlink/sql/ast.hpp"

namespace streamlink::gen {

// How a value mentioned next to a column becomes a predicate.
enum class MatchMode {
  Contains,  // col LIKE '%v%'
  Equals,    // col = v
  Date,      // after/since/before/in/on <date> phrases
};

struct ColumnSynonyms {
  std::string column;
  std::vector<std::string> synonyms;  // lower-case words or phrases
  MatchMode match = MatchMode::Equals;
};

// Vocabulary for one table. JSON form (data/synonyms.json):
//   {"table": "...", "table_synonyms": [...], "entity_column": "...",
//    "columns": {"col": {"synonyms": [...], "match": "contains|equals|date"}}}
// `entity_column` receives bare "by/from/for <Name>" mentions.
struct SynonymMap {
  std::string table;
  std::vector<std::string> table_synonyms;
  std::vector<ColumnSynonyms> columns;
  std::string entity_column;

  static SynonymMap from_json(const nlohmann::json& j);
  static SynonymMap load(const std::filesystem::path& path);
  // Column names (with '_' read as a space) as the only synonyms.
  static SynonymMap defaults_for(const sql::TableDef& table);
};

// Rule-based translator. Recognised intents, first match wins:
//   top-N     "top N ..." / "most frequent ..." with a column to rank
//             -> SELECT col, COUNT(*) AS count ... GROUP BY col
//                ORDER BY count DESC LIMIT N (N defaults to 10)
//   count     "count ..." / "how many ..." / "number of ..."
//             -> SELECT COUNT(*) ..., or grouped with "by/per <column>"
//   selection "show/list/find/... <table or filters>" -> SELECT * ... [LIMIT N]
// Filters: "<column> [of|is|=|named|...] <value>", "by/from/for <Name>" on
// the entity column, and date phrases "after|since Y" (>=), "before Y" (<),
// "in|during Y" (LIKE 'Y%'), "on Y" (=) on the first date column.
// Anything else is NoMatch.
class TemplateBackend : public Backend {
 public:
  explicit TemplateBackend(SynonymMap map, std::string id = "template");

  const std::string& id() const override { return id_; }
  GenerationResult generate(const GenerationRequest& request) const override;

  // The translated statement; throws GenerateError NoMatch.
  sql::Select translate(std::string_view nl, const sql::Schema& schema) const;

  const SynonymMap& synonyms() const { return map_; }

 private:
  SynonymMap map_;
  std::string id_;
};

}  // namespace streamlink::gen
