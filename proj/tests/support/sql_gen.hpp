#pragma once

#include <cstddef>
#include <vector>

#include "streamlink/random.hpp"
#include "streamlink/sql/ast.hpp"
#include "streamlink/sql/schema.hpp"
#include "streamlink/storage/value.hpp"

namespace streamlink::testkit {

// Any statement the grammar accepts: every statement class, nested boolean
// expressions, quoted identifiers, awkward literals. Satisfies the AST
// invariants, so print/parse must round-trip it.
sql::Statement random_statement(SeededRng& rng);

// Table used by the executor properties: id int (key), name text, cat text,
// score float, qty int, day date.
sql::TableDef query_table();

// Rows drawn from small domains so filters, groups and ties all occur.
std::vector<storage::Row> random_rows(SeededRng& rng, std::size_t count);

// A SELECT over query_table() that binds without error: type-compatible
// predicates, valid grouping and ORDER BY keys, optional LIMIT.
sql::Select random_query(SeededRng& rng);

}  // namespace streamlink::testkit
