// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Oracles here are written independently of the library
// code they check.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "streamlink/augment/augment.hpp"
#include "streamlink/check/checker.hpp"
#include "streamlink/eval/harness.hpp"
#include "streamlink/eval/metrics.hpp"
#include "streamlink/gateway/gateway.hpp"
#include "streamlink/gen/remote_backend.hpp"
#include "streamlink/random.hpp"
#include "streamlink/sql/normalize.hpp"
#include "streamlink/sql/parser.hpp"
#include "streamlink/sql/printer.hpp"
#include "streamlink/storage/executor.hpp"
#include "streamlink/storage/synthetic.hpp"
#include "fixtures.hpp"
#include "sql_gen.hpp"

using namespace streamlink;
namespace fs = std::filesystem;
namespace syn = streamlink::storage::synthetic;

namespace {

// Pinned limits.
constexpr double kOracleBudgetSeconds = 30.0;
constexpr double kRoundTripBudgetSeconds = 10.0;
constexpr double kAucTolerance = 1e-9;
constexpr int kMetricDigits = 4;
constexpr double kPipelineBudgetSeconds = 1.0;

const std::string kDataDir = STREAMLINK_TEST_DATA_DIR;
const std::string kGoldenDir = STREAMLINK_TEST_GOLDEN_DIR;

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Collects the first few failures of a criterion.
class Failures {
 public:
  void add(const std::string& what) {
    if (count_++ < 3) text_ += (text_.empty() ? "" : "; ") + what;
  }
  bool any() const { return count_ > 0; }
  std::string text() const { return std::to_string(count_) + " failure(s): " + text_; }

 private:
  std::size_t count_ = 0;
  std::string text_;
};

double seconds_since(std::chrono::steady_clock::time_point t) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
}

std::string fmt(double v, int digits = 2) {
  std::ostringstream ss;
  ss << std::fixed << std::setprecision(digits) << v;
  return ss.str();
}

std::vector<std::string> printed_rows(const storage::ResultSet& rs) {
  std::vector<std::string> out;
  for (const auto& row : rs.rows) {
    std::string line;
    for (const auto& v : row) line += storage::to_text(v) + "\x1f";
    out.push_back(line);
  }
  return out;
}

// ---- 1. distributed execution equals single-node execution ----

Outcome oracle_equivalence() {
  const auto start = std::chrono::steady_clock::now();
  SeededRng rng(20240601);
  const auto def = testkit::query_table();
  const auto rows = testkit::random_rows(rng, 1000);
  std::vector<sql::Select> queries;
  for (int i = 0; i < 200; ++i) queries.push_back(testkit::random_query(rng));

  Failures f;
  std::size_t checked = 0;
  for (std::size_t n : {1u, 2u, 3u, 5u}) {
    storage::ShardedTable table(def, n, "id");
    table.insert(rows);
    for (const auto& q : queries) {
      auto want = storage::reference_execute(q, def, rows);
      for (bool parallel : {false, true}) {
        storage::DistributedOptions opts;
        opts.parallel = parallel;
        auto got = storage::execute_distributed(q, table, opts);
        auto a = printed_rows(got);
        auto b = printed_rows(want);
        if (q.order_by.empty()) {
          std::sort(a.begin(), a.end());
          std::sort(b.begin(), b.end());
        }
        if (a != b || got.columns != want.columns) {
          f.add("N=" + std::to_string(n) + (parallel ? " parallel: " : " serial: ") + sql::print(sql::Statement{q}));
        }
        ++checked;
      }
    }
  }
  double secs = seconds_since(start);
  if (secs >= kOracleBudgetSeconds) f.add("took " + fmt(secs) + " s");
  return {!f.any(), f.any() ? f.text()
                            : std::to_string(checked) + " comparisons over N in {1,2,3,5}, " + fmt(secs) + " s"};
}

// ---- 2. print/parse round trip ----

Outcome parser_round_trip() {
  const auto start = std::chrono::steady_clock::now();
  SeededRng rng(4242);
  Failures f;
  for (int i = 0; i < 1000; ++i) {
    auto stmt = testkit::random_statement(rng);
    auto text = sql::print(stmt);
    try {
      if (!(sql::parse(text) == stmt)) f.add("changed: " + text);
    } catch (const Error& e) {
      f.add(std::string(e.code()) + ": " + text);
    }
  }
  double secs = seconds_since(start);
  if (secs >= kRoundTripBudgetSeconds) f.add("took " + fmt(secs) + " s");
  return {!f.any(), f.any() ? f.text() : "1000 statements, " + fmt(secs) + " s"};
}

// ---- 3. metric exactness ----

struct Frac {
  std::uint64_t n = 0;
  std::uint64_t d = 1;
};

std::optional<Frac> frac(std::uint64_t n, std::uint64_t d) {
  if (d == 0) return std::nullopt;
  auto g = std::gcd(n, d);
  return Frac{n / g, d / g};
}

bool same(const std::optional<eval::Rational>& got, const std::optional<Frac>& want) {
  if (got.has_value() != want.has_value()) return false;
  if (!got) return true;
  if (got->num != want->n || got->den != want->d) return false;
  const auto scale = static_cast<std::uint64_t>(std::llround(std::pow(10.0, kMetricDigits)));
  // Integer rounding of the exact fraction, half up, in units of 10^-digits.
  auto want_units = (want->n * scale * 2 + want->d) / (2 * want->d);
  auto got_units = static_cast<std::uint64_t>(std::llround(got->rounded(kMetricDigits) * static_cast<double>(scale)));
  return got_units == want_units;
}

double concordance(const std::vector<double>& scores, const std::vector<eval::Label>& labels) {
  double wins = 0;
  std::uint64_t pairs = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] != eval::Label::Malicious) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j] != eval::Label::Benign) continue;
      ++pairs;
      if (scores[i] > scores[j]) {
        wins += 1.0;
      } else if (scores[i] == scores[j]) {
        wins += 0.5;
      }
    }
  }
  return wins / static_cast<double>(pairs);
}

Outcome metrics_exactness() {
  SeededRng rng(99);
  Failures f;
  for (int i = 0; i < 1000; ++i) {
    // Include zero cells so the undefined cases are exercised.
    auto draw = [&] { return rng.chance(1, 8) ? 0u : static_cast<std::uint64_t>(rng.between(0, 50000)); };
    eval::ConfusionCounts c{draw(), draw(), draw(), draw()};
    auto m = eval::metrics(c);
    if (!same(m.precision, frac(c.tp, c.tp + c.fp))) f.add("precision " + c.to_json().dump());
    if (!same(m.recall, frac(c.tp, c.tp + c.fn))) f.add("recall " + c.to_json().dump());
    if (!same(m.escape, frac(c.fn, c.tp + c.fn))) f.add("escape " + c.to_json().dump());
    if (!same(m.misintercept, frac(c.fp, c.fp + c.tn))) f.add("misintercept " + c.to_json().dump());
    if (m.recall && m.escape) {
      // r + e == 1 as fractions: r.n * e.d + e.n * r.d == r.d * e.d.
      const auto& r = *m.recall;
      const auto& e = *m.escape;
      if (r.num * e.den + e.num * r.den != r.den * e.den) f.add("recall + escape != 1 " + c.to_json().dump());
    }
  }
  double worst = 0;
  for (int set = 0; set < 100; ++set) {
    const auto n = static_cast<std::size_t>(rng.between(2, 300));
    std::vector<double> scores(n);
    std::vector<eval::Label> labels(n);
    const auto grid = rng.between(2, 40);  // coarse grids force ties
    for (std::size_t i = 0; i < n; ++i) {
      scores[i] = static_cast<double>(rng.between(0, grid)) / static_cast<double>(grid);
      labels[i] = rng.chance(1, 2) ? eval::Label::Malicious : eval::Label::Benign;
    }
    labels[0] = eval::Label::Malicious;
    labels[1] = eval::Label::Benign;
    double got = eval::roc_auc(scores, labels).auc;
    double want = concordance(scores, labels);
    worst = std::max(worst, std::abs(got - want));
    if (std::abs(got - want) > kAucTolerance) f.add("AUC " + fmt(got, 12) + " vs " + fmt(want, 12));
  }
  std::ostringstream worst_text;
  worst_text << std::scientific << std::setprecision(1) << worst;
  return {!f.any(), f.any() ? f.text() : "1000 count sets exact; 100 AUC sets, max deviation " + worst_text.str()};
}

// ---- 4. checker corpus ----

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome checker_corpus() {
  Failures f;
  auto policy = check::SecurityPolicy::load(kDataDir + "/policy.json");
  auto schema = sql::Schema::load(kDataDir + "/schema.json");
  check::Checker checker(policy, &schema);
  std::size_t dropped = 0;
  auto corpus = eval::load_checker_corpus(kDataDir + "/checker_corpus.csv", {}, &dropped);
  std::size_t malicious = 0;
  for (const auto& s : corpus) malicious += s.label == eval::Label::Malicious;
  if (corpus.size() != 40 || malicious != 20 || dropped != 0) f.add("corpus shape");

  auto report = eval::run_checker_eval(corpus, checker);
  auto counts_text = report.counts.to_json().dump() + "\n";
  if (counts_text != slurp(kGoldenDir + "/checker_corpus_counts.json")) f.add("counts differ: " + counts_text);
  if (report.metrics.recall != eval::Rational::of(1, 1)) f.add("recall below 100%");
  if (report.metrics.misintercept != eval::Rational::of(0, 1)) f.add("misintercept above 0%");

  // Every malicious statement is blocked by the rule it was written for.
  std::set<std::string> fired;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    for (const auto& h : report.verdicts[i].hits) fired.insert(h.rule);
  }
  for (const auto& r : check::rule_ids()) {
    if (!fired.contains(r)) f.add(r + " never fired");
  }

  std::string detail = "TP 20 FP 0 FN 0 TN 20, every rule fired";
  if (const char* big = std::getenv("STREAMLINK_KAGGLE_CORPUS"); big != nullptr && *big != '\0') {
    eval::CorpusFormat fmt_kaggle;
    fmt_kaggle.statement_column = "Query";
    fmt_kaggle.label_column = "Label";
    auto rows = eval::load_checker_corpus(big, fmt_kaggle);
    std::size_t bad = 0;
    for (const auto& s : rows) bad += s.label == eval::Label::Malicious;
    if (rows.size() != 30595 || bad != 11337) {
      f.add("large corpus has " + std::to_string(rows.size()) + " rows / " + std::to_string(bad) + " malicious");
    }
    auto big_report = eval::run_checker_eval(rows, checker);
    detail += "; large corpus report: " + big_report.to_json()["counts"].dump();
  } else {
    detail += "; STREAMLINK_KAGGLE_CORPUS not set, large corpus skipped";
  }
  return {!f.any(), f.any() ? f.text() : detail};
}

// ---- 5. end-to-end analyst question ----

Outcome end_to_end() {
  Failures f;
  auto config = gateway::GatewayConfig::load(kDataDir + "/gateway.json");
  config.audit_log.reset();
  auto gw = gateway::Gateway::from_config(config);
  auto out = gw->handle_query({std::string(testkit::kIntelQuestion), ""});

  auto canon = [](std::string_view s) { return sql::canonical_text(sql::parse(s)); };
  if (out.sql.empty() || canon(out.sql) != canon(testkit::kIntelTopCpcSql)) f.add("SQL: " + out.sql);
  if (!out.verdict || out.verdict->blocked()) f.add("not allowed");

  // Expected rows straight from the generator's quota table.
  std::vector<std::pair<std::string, std::int64_t>> want;
  for (std::size_t j = 0; j < 10; ++j) {
    want.emplace_back(std::string(syn::kCpcCodes[j]), syn::kRecentBase - syn::kRecentStep * static_cast<std::int64_t>(j));
  }
  // Plain scan of the bundled rows as a second witness.
  std::map<std::string, std::int64_t> scan;
  for (const auto& r : syn::generate()) {
    const auto& assignee = std::get<std::string>(r[1]);
    const auto& date = std::get<std::string>(r[3]);
    if (assignee.find("Intel") != std::string::npos && date >= "2009") ++scan[std::get<std::string>(r[2])];
  }
  for (const auto& [code, count] : want) {
    if (scan[code] != count) f.add("quota for " + code);
  }
  if (!out.rows || out.rows->rows.size() != 10) {
    f.add("row count");
  } else {
    for (std::size_t j = 0; j < 10; ++j) {
      const auto& row = out.rows->rows[j];
      if (std::get<std::string>(row[0]) != want[j].first || std::get<std::int64_t>(row[1]) != want[j].second) {
        f.add("row " + std::to_string(j));
      }
    }
  }
  double total = std::chrono::duration<double>(out.trace.times.total).count();
  if (total >= kPipelineBudgetSeconds) f.add("latency " + fmt(total, 3) + " s");
  return {!f.any(), f.any() ? f.text() : "10 rows as predicted, Allow, total " + fmt(total * 1000, 2) + " ms"};
}

// ---- 6. augmentation laws ----

augment::TemplateSet random_template(SeededRng& rng) {
  static const std::vector<std::string> cols = {"assignee", "cpc", "title"};
  augment::TemplateSet set;
  const auto slots = rng.between(1, 3);
  std::string where;
  std::vector<std::string> names;
  for (std::int64_t s = 0; s < slots; ++s) {
    std::string name = "f" + std::to_string(s);
    names.push_back(name);
    std::vector<augment::SlotValue> values;
    const auto count = rng.between(1, 5);
    bool numeric = rng.chance(1, 3);
    for (std::int64_t v = 0; v < count; ++v) {
      if (numeric) {
        values.emplace_back(static_cast<std::int64_t>(rng.between(0, 9999)));
      } else {
        std::string text = "v" + std::to_string(rng.between(0, 999));
        if (rng.chance(1, 4)) text += "'s";
        values.emplace_back(text);
      }
    }
    if (!where.empty()) where += " AND ";
    where += numeric ? "id = {" + name + "}" : cols[static_cast<std::size_t>(s)] + " LIKE '%{" + name + "}%'";
    set.fields.fields.emplace_back(name, std::move(values));
  }
  set.sql_template = "SELECT title FROM google_full WHERE " + where;
  const auto paraphrases = rng.between(1, 4);
  for (std::int64_t p = 0; p < paraphrases; ++p) {
    std::string nl = "variant " + std::to_string(p) + ":";
    for (const auto& n : names) nl += " {" + n + "}";
    set.nl_templates.push_back(nl);
  }
  return set;
}

Outcome augmentation_laws() {
  SeededRng rng(31337);
  Failures f;
  std::vector<augment::Pair> all_domain;
  for (int t = 0; t < 100; ++t) {
    auto set = random_template(rng);
    std::uint64_t want = set.nl_templates.size();
    for (const auto& field : set.fields.fields) want *= field.second.size();
    auto pairs = augment::expand(set, augment::ExpandMode::Cartesian);
    if (pairs.size() != want) f.add("template " + std::to_string(t) + ": " + std::to_string(pairs.size()) + " != " + std::to_string(want));
    all_domain.insert(all_domain.end(), pairs.begin(), pairs.end());
  }
  std::vector<augment::Pair> open;
  for (int i = 0; i < 5000; ++i) {
    open.push_back({"open question " + std::to_string(i), "SELECT a FROM t" + std::to_string(i % 17), "open", {}});
  }
  for (std::uint64_t seed : {1u, 7u, 123u}) {
    auto m = augment::mix(all_domain, open, augment::Ratio{1, 1}, seed);
    auto diff = m.domain_count > m.open_count ? m.domain_count - m.open_count : m.open_count - m.domain_count;
    if (diff > 1) f.add("1:1 mix off by " + std::to_string(diff));
    std::ostringstream a, b;
    augment::write_jsonl(m.pairs, a);
    augment::write_jsonl(augment::mix(all_domain, open, augment::Ratio{1, 1}, seed).pairs, b);
    if (a.str() != b.str()) f.add("seed " + std::to_string(seed) + " not reproducible");
  }
  return {!f.any(), f.any() ? f.text()
                            : "100 templates (" + std::to_string(all_domain.size()) +
                                  " pairs) match the product law; 1:1 within 1; reruns identical"};
}

// ---- 7. EM / EA harness ----

// Gold queries over the bundled table with cosmetic rewrites of each.
const std::vector<std::pair<std::string, std::string>> kEvalPairs = {
    {"SELECT COUNT(*) FROM google_full", "select count(*) from google_full"},
    {"SELECT cpc, COUNT(*) AS count FROM google_full GROUP BY cpc ORDER BY count DESC LIMIT 5",
     "SELECT cpc,COUNT(*) AS count FROM google_full GROUP BY cpc ORDER BY count DESC LIMIT 5"},
    {"SELECT title FROM google_full WHERE assignee = 'Intel Corporation' LIMIT 3",
     "SELECT title FROM google_full WHERE assignee = \"Intel Corporation\" LIMIT 3"},
    {"SELECT COUNT(*) FROM google_full WHERE grant_date >= '2015'",
     "SELECT  COUNT(*)\nFROM google_full\nWHERE grant_date >= '2015'"},
    {"SELECT patent_id FROM google_full WHERE cpc = 'G06F' ORDER BY patent_id LIMIT 4",
     "SELECT patent_id FROM google_full WHERE (cpc = 'G06F') ORDER BY patent_id ASC LIMIT 4"},
    {"SELECT cpc, COUNT(*) AS count FROM google_full WHERE assignee LIKE '%Intel%' GROUP BY cpc ORDER BY count DESC LIMIT 10",
     "select CPC, count(*) as COUNT from GOOGLE_FULL where ASSIGNEE like '%Intel%' group by CPC order by COUNT desc limit 10"},
    {"SELECT COUNT(*) FROM google_full WHERE cpc IN ('G06F', 'H01L')",
     "SELECT COUNT(*) FROM google_full WHERE cpc IN ( 'G06F' , 'H01L' )"},
    {"SELECT COUNT(*) FROM google_full WHERE grant_date BETWEEN '2010-01-01' AND '2012-12-31'",
     "SELECT count(*) FROM google_full WHERE grant_date between '2010-01-01' and '2012-12-31'"},
    {"SELECT assignee, COUNT(*) AS n FROM google_full GROUP BY assignee ORDER BY n DESC LIMIT 3",
     "SELECT assignee, COUNT(*) AS n FROM google_full GROUP BY assignee ORDER BY n DESC LIMIT 3;"},
    {"SELECT title FROM google_full WHERE cpc = 'H04L' AND grant_date < '2000' LIMIT 2",
     "SELECT title FROM google_full WHERE ((cpc = 'H04L') AND (grant_date < '2000')) LIMIT 2"},
    {"SELECT COUNT(*) FROM google_full WHERE NOT assignee LIKE '%Intel%'",
     "SELECT COUNT(*) FROM google_full WHERE NOT (assignee LIKE '%Intel%')"},
    {"SELECT cpc FROM google_full WHERE patent_id = 'US8000001' LIMIT 1",
     "SELECT `cpc` FROM `google_full` WHERE `patent_id` = 'US8000001' LIMIT 1"},
    {"SELECT COUNT(*) FROM google_full WHERE grant_date LIKE '2019%'",
     "SELECT COUNT( * ) FROM google_full WHERE grant_date LIKE '2019%'"},
    {"SELECT grant_date FROM google_full WHERE cpc = 'G11C' ORDER BY grant_date DESC LIMIT 5",
     "select grant_date from google_full where cpc='G11C' order by grant_date desc limit 5"},
    {"SELECT cpc, COUNT(*) AS count FROM google_full WHERE grant_date >= '2009' GROUP BY cpc ORDER BY count DESC LIMIT 3",
     "SELECT cpc, COUNT(*) AS count FROM google_full WHERE grant_date >= \"2009\" GROUP BY cpc ORDER BY count DESC LIMIT 3"},
    {"SELECT COUNT(*) FROM google_full WHERE assignee = 'Intel IP Corporation' OR assignee = 'Intel Corporation'",
     "SELECT COUNT(*) FROM google_full WHERE (assignee = 'Intel IP Corporation') OR (assignee = 'Intel Corporation')"},
    {"SELECT title FROM google_full WHERE title LIKE '%memory%' LIMIT 6",
     "SELECT title\tFROM google_full WHERE title LIKE '%memory%' LIMIT 6"},
    {"SELECT patent_id, cpc FROM google_full WHERE cpc NOT IN ('G06F') ORDER BY patent_id LIMIT 3",
     "SELECT patent_id, cpc FROM google_full WHERE cpc NOT IN ('G06F') ORDER BY patent_id LIMIT 3 -- recheck"},
    {"SELECT COUNT(*) FROM google_full WHERE grant_date > '2020-06-30'",
     "SELECT COUNT(*) FROM google_full WHERE grant_date > '2020-06-30' "},
    {"SELECT assignee FROM google_full WHERE cpc = 'B82Y' ORDER BY assignee LIMIT 2",
     "SELECT assignee FROM google_full WHERE cpc = 'B82Y' ORDER BY assignee ASC LIMIT 2"},
};

Outcome em_ea_harness() {
  Failures f;
  auto config = gateway::GatewayConfig::load(kDataDir + "/gateway.json");
  config.audit_log.reset();
  auto gw = gateway::Gateway::from_config(config);
  eval::DatabaseSet dbs;
  dbs.fallback = &gw->database();

  std::vector<eval::EvalRecord> records;
  std::map<std::string, std::string> preds;
  for (std::size_t i = 0; i < kEvalPairs.size(); ++i) {
    auto q = "question " + std::to_string(i);
    records.push_back({q, kEvalPairs[i].first, ""});
    preds[q] = kEvalPairs[i].second;
  }
  auto check_run = [&](const std::map<std::string, std::string>& answers, std::size_t want_em, std::size_t want_ea,
                       const std::string& label) {
    gen::ReplayBackend backend(answers);
    auto report = eval::run_eval(records, backend, dbs);
    if (report.evaluated != 20) f.add(label + ": evaluated " + std::to_string(report.evaluated));
    if (report.em != want_em || report.ea != want_ea) {
      f.add(label + ": EM " + std::to_string(report.em) + " EA " + std::to_string(report.ea));
    }
    for (const auto& o : report.outcomes) {
      if (o.em && o.ea.outcome != eval::EaOutcome::Match) f.add(label + ": EM without EA on " + o.record.gold);
    }
  };
  std::size_t empty_gold = 0;
  for (const auto& r : records) {
    empty_gold += storage::execute(sql::parse(r.gold).as<sql::Select>(), gw->database()).rows.empty();
  }
  if (empty_gold != 0) f.add(std::to_string(empty_gold) + " gold queries return no rows");
  check_run(preds, 20, 20, "rewrites");
  auto perturbed = preds;
  perturbed["question 1"] = "SELECT cpc, COUNT(*) AS count FROM google_full GROUP BY cpc ORDER BY count DESC LIMIT 6";
  check_run(perturbed, 19, 19, "one LIMIT changed");
  return {!f.any(), f.any() ? f.text() : "EM = EA = 100% on rewrites, 95% with one LIMIT changed, EM implies EA"};
}

// ---- 8. gateway properties ----

Outcome gateway_properties() {
  Failures f;
  // Fairness over 10 x n requests.
  for (int n = 1; n <= 6; ++n) {
    gateway::NodeRegistry reg;
    for (int i = 0; i < n; ++i) reg.add({"g" + std::to_string(i), gateway::NodeRole::Generator, "http://g"}, true);
    reg.add({"down", gateway::NodeRole::Generator, "http://down"}, false);
    std::map<std::string, int> hits;
    for (int r = 0; r < 10 * n; ++r) ++hits[reg.balance(gateway::NodeRole::Generator)];
    for (const auto& [id, count] : hits) {
      if (count != 10) f.add("n=" + std::to_string(n) + " " + id + " got " + std::to_string(count));
    }
    if (static_cast<int>(hits.size()) != n) f.add("n=" + std::to_string(n) + " wrong node set");
  }

  // Fault-injection probe script: each node fails on its own schedule.
  gateway::NodeRegistry reg;
  const std::vector<std::string> ids = {"a", "b", "c", "d"};
  for (const auto& id : ids) reg.add({id, gateway::NodeRole::Generator, "http://" + id}, true);
  SeededRng rng(8);
  std::map<std::string, std::uint64_t> fail_rate = {{"a", 1}, {"b", 3}, {"c", 5}, {"d", 9}};
  gateway::HealthProber prober(
      reg, [&](const gateway::NodeSpec& n) { return !rng.chance(fail_rate[n.id], 10); }, std::chrono::seconds(60));
  std::size_t routed = 0, misrouted = 0, refused = 0, unhealthy_seen = 0;
  for (int sweep = 0; sweep < 500; ++sweep) {
    prober.probe_once();
    unhealthy_seen += ids.size() - reg.healthy(gateway::NodeRole::Generator).size();
    for (int r = 0; r < 8; ++r) {
      try {
        auto id = reg.balance(gateway::NodeRole::Generator);
        ++routed;
        if (reg.health(id) != gateway::Health::Healthy) ++misrouted;
      } catch (const gateway::GatewayError&) {
        ++refused;
      }
    }
  }
  if (misrouted != 0) f.add(std::to_string(misrouted) + " requests routed to Unhealthy nodes");
  if (routed == 0) f.add("nothing routed");
  if (unhealthy_seen == 0) f.add("fault script never took a node down");

  // All-malicious workload never reaches the executor.
  gateway::GatewayParts parts;
  auto db = std::make_shared<storage::Database>(syn::schema(), 3);
  db->ingest_rows(syn::kTableName, syn::generate(), "patent_id");
  parts.db = db;
  parts.policy = check::SecurityPolicy::load(kDataDir + "/policy.json");
  parts.template_backend = nullptr;
  parts.mode = gateway::BackendMode::Remote;
  auto corpus = eval::load_checker_corpus(kDataDir + "/checker_corpus.csv");
  std::vector<std::string> malicious;
  for (const auto& s : corpus) {
    if (s.label == eval::Label::Malicious) malicious.push_back(s.statement);
  }
  // A generator node per malicious statement, all reached through the balancer.
  class Fixed : public gen::Backend {
   public:
    Fixed(std::string id, std::string sql) : id_(std::move(id)), sql_(std::move(sql)) {}
    const std::string& id() const override { return id_; }
    gen::GenerationResult generate(const gen::GenerationRequest&) const override { return {{sql_}, id_, "", {}}; }

   private:
    std::string id_, sql_;
  };
  for (std::size_t i = 0; i < malicious.size(); ++i) {
    auto id = "bad-" + std::to_string(i);
    parts.generators.push_back({{id, gateway::NodeRole::Generator, "http://" + id}, std::make_shared<Fixed>(id, malicious[i]), true});
  }
  gateway::Gateway gw(std::move(parts));
  std::size_t refusals = 0;
  for (std::size_t r = 0; r < malicious.size() * 5; ++r) {
    auto out = gw.handle_query({"anything", ""});
    refusals += out.refused && !out.trace.refusal.empty();
  }
  for (const auto& sql : malicious) refusals += gw.handle_query({"", sql}).refused;
  if (gw.executor().calls() != 0) f.add("executor called " + std::to_string(gw.executor().calls()) + " times");
  if (refusals != malicious.size() * 6) f.add("only " + std::to_string(refusals) + " refusals");

  return {!f.any(), f.any() ? f.text()
                            : "fair for n=1..6; " + std::to_string(routed) + " routed, 0 to Unhealthy over " +
                                  std::to_string(unhealthy_seen) + " node-sweeps down (" +
                                  std::to_string(refused) + " NoHealthyBackend); executor calls 0 after " +
                                  std::to_string(refusals) + " refusals"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"oracle-equivalence", oracle_equivalence},
      {"parser-round-trip", parser_round_trip},
      {"metrics-exactness", metrics_exactness},
      {"checker-corpus", checker_corpus},
      {"end-to-end-example", end_to_end},
      {"augmentation-laws", augmentation_laws},
      {"em-ea-harness", em_ea_harness},
      {"gateway-properties", gateway_properties},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const Error& e) {
      o = {false, std::string("threw ") + e.code() + ": " + e.what()};
    } catch (const std::exception& e) {
      o = {false, std::string("threw ") + e.what()};
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS " : "FAIL ") << std::left << std::setw(20) << name << " " << o.detail << std::endl;
  }
  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << "\n";
  return failed == 0 ? 0 : 1;
}
