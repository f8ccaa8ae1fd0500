// Serial vs OpenMP: distributed query execution, checker batches and
// template expansion.

#include <benchmark/benchmark.h>

#include <map>
#include <memory>

#include "streamlink/augment/augment.hpp"
#include "streamlink/check/checker.hpp"
#include "streamlink/sql/parser.hpp"
#include "streamlink/storage/executor.hpp"
#include "streamlink/storage/synthetic.hpp"

namespace sl = streamlink;
namespace syn = streamlink::storage::synthetic;

namespace {

const sl::storage::Database& patent_db(std::size_t shards) {
  static std::map<std::size_t, std::unique_ptr<sl::storage::Database>> cache;
  auto& db = cache[shards];
  if (!db) {
    db = std::make_unique<sl::storage::Database>(syn::schema(), shards);
    db->ingest_rows(syn::kTableName, syn::generate(syn::kDefaultSeed, 100'000), "patent_id");
  }
  return *db;
}

const sl::sql::Select& top_cpc() {
  static const auto q = sl::sql::parse(
                            "SELECT cpc, COUNT(*) AS count FROM google_full WHERE assignee LIKE '%Intel%' AND "
                            "grant_date >= '2009' GROUP BY cpc ORDER BY count DESC LIMIT 10")
                            .as<sl::sql::Select>();
  return q;
}

const sl::sql::Select& ordered_scan() {
  static const auto q =
      sl::sql::parse("SELECT patent_id, title FROM google_full WHERE title LIKE '%memory%' ORDER BY patent_id LIMIT 50")
          .as<sl::sql::Select>();
  return q;
}

void run_query(benchmark::State& state, const sl::sql::Select& q, bool parallel) {
  const auto& db = patent_db(static_cast<std::size_t>(state.range(0)));
  sl::storage::DistributedOptions opts;
  opts.parallel = parallel;
  for (auto _ : state) benchmark::DoNotOptimize(sl::storage::execute(q, db, opts));
  state.SetItemsProcessed(state.iterations() * 100'000);
}

void BM_TopCpcSerial(benchmark::State& s) { run_query(s, top_cpc(), false); }
void BM_TopCpcOpenMP(benchmark::State& s) { run_query(s, top_cpc(), true); }
void BM_OrderedScanSerial(benchmark::State& s) { run_query(s, ordered_scan(), false); }
void BM_OrderedScanOpenMP(benchmark::State& s) { run_query(s, ordered_scan(), true); }

BENCHMARK(BM_TopCpcSerial)->Arg(1)->Arg(3)->Arg(8)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_TopCpcOpenMP)->Arg(1)->Arg(3)->Arg(8)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_OrderedScanSerial)->Arg(3)->Arg(8)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_OrderedScanOpenMP)->Arg(3)->Arg(8)->Unit(benchmark::kMillisecond);

std::vector<std::string> checker_workload() {
  std::vector<std::string> out;
  for (int i = 0; i < 2000; ++i) {
    switch (i % 4) {
      case 0: out.push_back("SELECT title FROM google_full WHERE cpc = 'G06F' AND grant_date >= '20" + std::to_string(10 + i % 10) + "'"); break;
      case 1: out.push_back("SELECT * FROM google_full WHERE assignee = 'a" + std::to_string(i) + "' OR 1=1"); break;
      case 2: out.push_back("SELECT cpc, COUNT(*) AS count FROM google_full GROUP BY cpc ORDER BY count DESC LIMIT " + std::to_string(i % 50 + 1)); break;
      default: out.push_back("SELECT a FROM t; DROP TABLE t" + std::to_string(i)); break;
    }
  }
  return out;
}

void BM_CheckerBatch(benchmark::State& state) {
  static const auto work = checker_workload();
  sl::check::Checker checker;
  const bool parallel = state.range(0) != 0;
  for (auto _ : state) benchmark::DoNotOptimize(checker.check_batch(work, parallel));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(work.size()));
}
BENCHMARK(BM_CheckerBatch)->ArgName("openmp")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_ExpandTemplates(benchmark::State& state) {
  static const auto sets = sl::augment::load_templates(STREAMLINK_BENCH_DATA_DIR "/templates/count_by_assignee.json");
  std::vector<sl::augment::TemplateSet> many;
  for (int i = 0; i < 64; ++i) many.insert(many.end(), sets.begin(), sets.end());
  for (auto _ : state) benchmark::DoNotOptimize(sl::augment::expand_all(many, sl::augment::ExpandMode::Cartesian));
}
BENCHMARK(BM_ExpandTemplates)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
