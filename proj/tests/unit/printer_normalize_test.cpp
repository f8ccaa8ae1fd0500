#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "sql_gen.hpp"
#include "streamlink/sql/normalize.hpp"
#include "streamlink/sql/parser.hpp"
#include "streamlink/sql/printer.hpp"

using namespace streamlink::sql;
using streamlink::SeededRng;
using streamlink::testkit::kIntelTopCpcSql;
using streamlink::testkit::random_statement;

TEST(Printer, ExampleCommandRoundTrips) {
  Statement s = parse(kIntelTopCpcSql);
  EXPECT_EQ(parse(print(s)), s);
  EXPECT_EQ(print(s), kIntelTopCpcSql);
}

TEST(Printer, ParenthesesOnlyWhereNeeded) {
  EXPECT_EQ(print(parse("select a from t where (a = 1 or b = 2) and c = 3")),
            "SELECT a FROM t WHERE (a = 1 OR b = 2) AND c = 3");
  EXPECT_EQ(print(parse("select a from t where ((a = 1)) or (b = 2 and c = 3)")),
            "SELECT a FROM t WHERE a = 1 OR b = 2 AND c = 3");
  EXPECT_EQ(print(parse("select a from t where not (a = 1 or b = 2)")), "SELECT a FROM t WHERE NOT (a = 1 OR b = 2)");
  // Nested same-operator groups keep their parentheses so the tree survives.
  EXPECT_EQ(print(parse("select a from t where a = 1 and (b = 2 and c = 3)")),
            "SELECT a FROM t WHERE a = 1 AND (b = 2 AND c = 3)");
}

TEST(Printer, QuotesIdentifiersWhenNeeded) {
  EXPECT_EQ(print_identifier("order"), "`order`");
  EXPECT_EQ(print_identifier("my col"), "`my col`");
  EXPECT_EQ(print_identifier("cpc"), "cpc");
  EXPECT_EQ(print(parse("select `order` from `my table`")), "SELECT `order` FROM `my table`");
}

TEST(Printer, LiteralForms) {
  EXPECT_EQ(print(Literal{2.0}), "2.0");
  EXPECT_EQ(print(Literal{std::int64_t{-7}}), "-7");
  EXPECT_EQ(print(Literal{StringLit{"it's", QuoteStyle::Single}}), "'it''s'");
  EXPECT_EQ(print(Literal{StringLit{"say \"x\"", QuoteStyle::Double}}), "\"say \"\"x\"\"\"");
}

TEST(Normalize, CaseFolding) {
  EXPECT_EQ(normalize(parse("select A from T")), normalize(parse("SELECT a FROM t")));
  EXPECT_EQ(canonical_text(parse("SELECT A FROM T")), "select a from t");
}

TEST(Normalize, CommutativeOperandsSorted) {
  EXPECT_EQ(normalize(parse("SELECT a FROM t WHERE x=1 AND y=2")),
            normalize(parse("SELECT a FROM t WHERE y=2 AND x=1")));
  EXPECT_NE(normalize(parse("SELECT a FROM t WHERE x=1 AND y=2")),
            normalize(parse("SELECT a FROM t WHERE x=1 OR y=2")));
}

TEST(Normalize, RedundantGroupingFlattened) {
  EXPECT_EQ(normalize(parse("SELECT a FROM t WHERE a = 1 AND (b = 2 AND c = 3)")),
            normalize(parse("SELECT a FROM t WHERE (c = 3 AND a = 1) AND b = 2")));
}

TEST(Normalize, QuoteStyleUnified) {
  EXPECT_EQ(canonical_text(parse(kIntelTopCpcSql)),
            "select cpc, count(*) as count from google_full where assignee like '%Intel%' and grant_date >= '2009' "
            "group by cpc order by count desc limit 10");
}

TEST(Normalize, LiteralValuesKeepCase) {
  EXPECT_NE(normalize(parse("SELECT a FROM t WHERE a = 'X'")), normalize(parse("SELECT a FROM t WHERE a = 'x'")));
}

TEST(Normalize, PreservesSemanticsOfOrder) {
  // ORDER BY and projection order are not commutative.
  EXPECT_NE(normalize(parse("SELECT a, b FROM t")), normalize(parse("SELECT b, a FROM t")));
  EXPECT_NE(normalize(parse("SELECT a FROM t ORDER BY a")), normalize(parse("SELECT a FROM t ORDER BY a DESC")));
}

TEST(RoundTripProperty, ThousandRandomStatements) {
  SeededRng rng(2024);
  int failures = 0;
  for (int i = 0; i < 1000; ++i) {
    Statement s = random_statement(rng);
    std::string text = print(s);
    Statement back = parse(text);
    if (!(back == s)) {
      ++failures;
      ADD_FAILURE() << text;
    }
    EXPECT_EQ(parse(print(s, {KeywordCase::Lower})), s);
  }
  EXPECT_EQ(failures, 0);
}

TEST(NormalizeProperty, IdempotentOnRandomStatements) {
  SeededRng rng(99);
  for (int i = 0; i < 1000; ++i) {
    Statement s = random_statement(rng);
    Statement n = normalize(s);
    EXPECT_EQ(normalize(n), n) << print(s);
    // The canonical text is itself a fixed point of parse + normalize.
    EXPECT_EQ(normalize(parse(canonical_text(s))), n) << print(s);
  }
}
