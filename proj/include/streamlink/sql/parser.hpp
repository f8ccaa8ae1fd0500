#pragma once

#include <span>
#include <string_view>

#include "streamlink/sql/ast.hpp"
#include "streamlink/sql/lexer.hpp"

namespace streamlink::sql {

// Parses the supported SQL subset. Throws ParseError: SyntaxError for
// malformed input, UnsupportedFeature for well-formed SQL outside the subset
// (JOIN, subqueries, functions other than COUNT(*), ...). Comment tokens are
// skipped. Semicolon-separated input yields a Stacked statement; a single
// trailing semicolon is allowed.
Statement parse(std::span<const Token> tokens);
Statement parse(std::string_view text, const LexOptions& options = {});

}  // namespace streamlink::sql
