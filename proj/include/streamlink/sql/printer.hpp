#pragma once

#include <string>

#include "streamlink/sql/ast.hpp"

namespace streamlink::sql {

enum class KeywordCase { Upper, Lower };

struct PrintOptions {
  KeywordCase keyword_case = KeywordCase::Upper;
};

// Renders a statement as SQL text. Parentheses are emitted exactly where the
// tree shape requires them, so parse(print(s)) == s for every valid tree.
std::string print(const Statement& stmt, const PrintOptions& options = {});
std::string print(const Expr& expr, const PrintOptions& options = {});
std::string print(const Literal& lit);
std::string print(const Operand& operand);

// Identifier as SQL text; backtick-quoted when it is a keyword or not a
// plain word.
std::string print_identifier(const std::string& name);
std::string print_qualified(const std::string& name);

}  // namespace streamlink::sql
