#include <gtest/gtest.h>

#include <algorithm>
#include <functional>

#include "sql_gen.hpp"
#include "streamlink/sql/parser.hpp"
#include "streamlink/sql/printer.hpp"
#include "streamlink/storage/executor.hpp"

using namespace streamlink;
using namespace streamlink::storage;

namespace {

sql::Select sel(std::string_view text) { return sql::parse(text).as<sql::Select>(); }

sql::TableDef patents_def() {
  return {"p", {{"id", sql::ColumnType::Int}, {"assignee", sql::ColumnType::Text}, {"cpc", sql::ColumnType::Text}}};
}

std::string code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return "none";
}

std::vector<std::string> printed(const ResultSet& rs) {
  std::vector<std::string> out;
  for (const auto& r : rs.rows) out.push_back(row_text(r));
  return out;
}

std::vector<std::string> sorted(std::vector<std::string> v) {
  std::sort(v.begin(), v.end());
  return v;
}

}  // namespace

TEST(ExecuteLocal, FilterOnOneShard) {
  std::vector<Row> shard = {{std::int64_t{1}, std::string("Intel"), std::string("A")},
                            {std::int64_t{2}, std::string("AMD"), std::string("A")},
                            {std::int64_t{3}, std::string("Intel"), std::string("B")}};
  BoundQuery q(sel("SELECT * FROM p WHERE assignee LIKE '%Intel%'"), patents_def());
  auto res = std::get<ResultSet>(execute_local(q, shard));
  EXPECT_EQ(res.rows.size(), 2u);
}

TEST(ExecuteLocal, GroupByGivesPartialAggregate) {
  std::vector<Row> shard = {{std::int64_t{1}, std::string("x"), std::string("A")},
                            {std::int64_t{2}, std::string("x"), std::string("A")},
                            {std::int64_t{3}, std::string("x"), std::string("B")}};
  BoundQuery q(sel("SELECT cpc, COUNT(*) FROM p GROUP BY cpc"), patents_def());
  auto part = std::get<PartialAggregate>(execute_local(q, shard));
  PartialAggregate want;
  want.counts[{std::string("A")}] = 2;
  want.counts[{std::string("B")}] = 1;
  EXPECT_EQ(part, want);
}

TEST(ExecuteLocal, NoGlobalOrderOrLimitPerShard) {
  std::vector<Row> shard;
  for (std::int64_t i = 0; i < 5; ++i) shard.push_back({i, std::string("a"), std::string("c")});
  BoundQuery q(sel("SELECT id FROM p ORDER BY id DESC LIMIT 2"), patents_def());
  EXPECT_EQ(std::get<ResultSet>(execute_local(q, shard)).rows.size(), 5u);
}

TEST(ExecuteLocal, ShardOverload) {
  ShardedTable t(patents_def(), 2, "id");
  t.insert({{std::int64_t{1}, std::string("a"), std::string("c")}, {std::int64_t{2}, std::string("b"), std::string("c")}});
  std::size_t total = 0;
  for (std::size_t s = 0; s < 2; ++s) total += std::get<ResultSet>(execute_local(sel("SELECT * FROM p"), t, s)).rows.size();
  EXPECT_EQ(total, 2u);
}

TEST(Binding, Errors) {
  auto def = patents_def();
  EXPECT_EQ(code_of([&] { BoundQuery(sel("SELECT * FROM p WHERE missing = 1"), def); }), "UnknownColumn");
  EXPECT_EQ(code_of([&] { BoundQuery(sel("SELECT nope FROM p"), def); }), "UnknownColumn");
  EXPECT_EQ(code_of([&] { BoundQuery(sel("SELECT * FROM p WHERE cpc > 5"), def); }), "TypeError");
  EXPECT_EQ(code_of([&] { BoundQuery(sel("SELECT * FROM p WHERE id LIKE '1%'"), def); }), "TypeError");
  EXPECT_EQ(code_of([&] { BoundQuery(sel("SELECT assignee, COUNT(*) FROM p GROUP BY cpc"), def); }), "InvalidQuery");
  EXPECT_EQ(code_of([&] { BoundQuery(sel("SELECT id, COUNT(*) FROM p"), def); }), "InvalidQuery");
}

TEST(MergePartials, SumThenTopOne) {
  PartialAggregate a, b;
  a.counts[{std::string("A")}] = 2;
  a.counts[{std::string("B")}] = 1;
  b.counts[{std::string("A")}] = 1;
  std::vector<PartialAggregate> parts = {a, b};
  auto rs = merge_partials(parts, sel("SELECT cpc, COUNT(*) AS count FROM p GROUP BY cpc ORDER BY count DESC LIMIT 1"),
                           patents_def());
  ASSERT_EQ(rs.rows.size(), 1u);
  EXPECT_EQ(rs.rows[0], (Row{std::string("A"), std::int64_t{3}}));
  EXPECT_TRUE(rs.ordered);
  EXPECT_EQ(rs.columns, (std::vector<std::string>{"cpc", "count"}));
}

TEST(MergePartials, ZeroPartsIsEmpty) {
  auto rs = merge_partials({}, sel("SELECT cpc, COUNT(*) FROM p GROUP BY cpc"), patents_def());
  EXPECT_TRUE(rs.rows.empty());
}

TEST(MergePartials, TiesBrokenByGroupKey) {
  PartialAggregate a;
  a.counts[{std::string("Z")}] = 1;
  a.counts[{std::string("M")}] = 1;
  a.counts[{std::string("A")}] = 1;
  std::vector<PartialAggregate> parts = {a};
  auto rs = merge_partials(parts, sel("SELECT cpc, COUNT(*) AS n FROM p GROUP BY cpc ORDER BY n DESC LIMIT 2"),
                           patents_def());
  EXPECT_EQ(printed(rs), (std::vector<std::string>{"A\t1", "M\t1"}));
}

TEST(Distributed, GlobalCountAlwaysOneRow) {
  ShardedTable t(patents_def(), 3, "id");
  auto rs = execute_distributed(sel("SELECT COUNT(*) FROM p"), t);
  ASSERT_EQ(rs.rows.size(), 1u);
  EXPECT_EQ(rs.rows[0][0], Value{std::int64_t{0}});
}

// A key's global count can beat every local top-k, so grouped queries must
// ship full partials.
TEST(Distributed, GroupedTopKNeedsFullPartials) {
  ShardedTable t(patents_def(), 2, "id");
  std::vector<Row> rows;
  std::int64_t id = 0;
  auto add = [&](std::size_t shard, const std::string& cpc, int times) {
    for (int i = 0; i < times;) {
      Row r{id++, std::string("a"), cpc};
      if (shard_of(r[0], 2) == shard) {
        rows.push_back(r);
        ++i;
      }
    }
  };
  add(0, "X", 3);
  add(0, "S", 2);
  add(1, "Y", 3);
  add(1, "S", 2);
  t.insert(rows);
  auto rs = execute_distributed(sel("SELECT cpc, COUNT(*) AS n FROM p GROUP BY cpc ORDER BY n DESC LIMIT 1"), t);
  ASSERT_EQ(rs.rows.size(), 1u);
  EXPECT_EQ(rs.rows[0], (Row{std::string("S"), std::int64_t{4}}));
}

TEST(Distributed, ShardFailures) {
  BoundQuery q(sel("SELECT * FROM p"), patents_def());
  auto fail_on = [](std::size_t bad) {
    return [bad](std::size_t s) -> LocalResult {
      if (s == bad || bad == 99) throw StorageError("IoError", "shard " + std::to_string(s) + " down");
      return ResultSet{};
    };
  };
  EXPECT_EQ(code_of([&] { scatter_gather(q, 3, fail_on(1)); }), "IoError");
  EXPECT_EQ(code_of([&] { scatter_gather(q, 3, fail_on(99)); }), "AllShardsFailed");
  EXPECT_EQ(code_of([&] { scatter_gather(q, 1, fail_on(99)); }), "IoError");
}

TEST(Distributed, DeterministicPrintedOutput) {
  SeededRng rng(5);
  auto rows = testkit::random_rows(rng, 300);
  ShardedTable t(testkit::query_table(), 3, "id");
  t.insert(rows);
  for (int i = 0; i < 30; ++i) {
    auto q = testkit::random_query(rng);
    EXPECT_EQ(printed(execute_distributed(q, t)), printed(execute_distributed(q, t, {false, false})));
  }
}

TEST(Reference, ExampleFilters) {
  auto def = patents_def();
  std::vector<Row> rows = {{std::int64_t{1}, std::string("Intel"), std::string("A")},
                           {std::int64_t{2}, std::string("AMD"), std::string("B")}};
  EXPECT_EQ(reference_execute(sel("SELECT id FROM p WHERE assignee = 'AMD' OR cpc IN ('A')"), def, rows).rows.size(), 2u);
  EXPECT_EQ(reference_execute(sel("SELECT id FROM p WHERE NOT id BETWEEN 2 AND 3"), def, rows).rows.size(), 1u);
}

// Smaller sibling of the acceptance run: sharded execution agrees with the
// single-node reference for every shard count.
TEST(OracleProperty, DistributedEqualsReference) {
  SeededRng rng(77);
  const auto def = testkit::query_table();
  auto rows = testkit::random_rows(rng, 400);
  for (std::size_t n : {1u, 2u, 3u, 5u}) {
    ShardedTable t(def, n, "id");
    t.insert(rows);
    std::size_t total = 0;
    for (auto sz : t.shard_sizes()) total += sz;
    ASSERT_EQ(total, rows.size());
    SeededRng qrng(1000 + n);
    for (int i = 0; i < 60; ++i) {
      auto q = testkit::random_query(qrng);
      auto want = reference_execute(q, def, rows);
      auto got = execute_distributed(q, t);
      EXPECT_EQ(got.columns, want.columns);
      if (q.order_by.empty()) {
        EXPECT_EQ(sorted(printed(got)), sorted(printed(want))) << sql::print(sql::Statement{q});
      } else {
        EXPECT_EQ(printed(got), printed(want)) << sql::print(sql::Statement{q});
      }
    }
  }
}
