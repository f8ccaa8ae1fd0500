#pragma once

#include <string>

#include "streamlink/sql/ast.hpp"

namespace streamlink::sql {

// Canonical form: identifiers lower-cased, string literals single-quoted,
// nested same-operator AND/OR groups flattened and their operands sorted by
// printed form. Idempotent.
Statement normalize(const Statement& stmt);
Expr normalize(const Expr& expr);

// print(normalize(stmt)) with lower-case keywords.
std::string canonical_text(const Statement& stmt);

}  // namespace streamlink::sql
