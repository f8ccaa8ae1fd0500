#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "streamlink/error.hpp"
#include "streamlink/sql/ast.hpp"

namespace streamlink::storage {

class StorageError : public Error {
 public:
  using Error::Error;
};

using Value = std::variant<std::int64_t, double, std::string>;
using Row = std::vector<Value>;

std::string to_text(const Value& v);

// Printed form of a row: values joined by a tab. Used as the deterministic
// tie-break and canonical ordering key.
std::string row_text(const Row& row);

bool is_numeric(const Value& v);

// Three-way comparison. Numbers compare numerically across int/float;
// strings compare bytewise. Mixing a string with a number throws TypeError.
int compare(const Value& a, const Value& b);

Value from_literal(const sql::Literal& lit);

// SQL LIKE with % (any run) and _ (one byte); case-sensitive, no escape.
bool like_match(std::string_view text, std::string_view pattern);

}  // namespace streamlink::storage
