#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "streamlink/sql/schema.hpp"

namespace streamlink::gen {

struct Exemplar {
  std::string nl;
  std::string sql;
};

struct PromptTemplate {
  std::string text;
};

// One line per table: name(col type, ...), in schema order.
std::string serialize_schema(const sql::Schema& schema);

// Task instruction, schema, optional few-shot block, then the question.
// Every exemplar must be a SELECT that binds against the schema; otherwise
// ExemplarInvalid names the first offending pair.
PromptTemplate build_prompt(const sql::Schema& schema, std::span<const Exemplar> exemplars, std::string_view nl_query);

// Reads [{"nl": ..., "sql": ...}, ...].
std::vector<Exemplar> load_exemplars(const std::string& path);

}  // namespace streamlink::gen
