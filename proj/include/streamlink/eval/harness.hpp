#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "streamlink/check/checker.hpp"
#include "streamlink/eval/metrics.hpp"
#include "streamlink/gen/generator.hpp"
#include "streamlink/storage/table.hpp"

namespace streamlink::eval {

// Whole-statement equality after normalization. Never throws: anything that
// fails to parse is not a match.
bool exact_match(std::string_view gold, std::string_view pred);

enum class EaOutcome { Match, Mismatch, GoldError, PredError };
std::string_view to_string(EaOutcome o);

struct EaResult {
  EaOutcome outcome = EaOutcome::Mismatch;
  std::string detail;  // error text for the error outcomes
};

// Runs both SELECTs on `db`. Rows are compared in order when the gold query
// has ORDER BY, as multisets otherwise. Column names are not compared.
EaResult execution_accuracy(std::string_view gold, std::string_view pred, const storage::Database& db);

struct EvalRecord {
  std::string question;
  std::string gold;
  std::string db_id;
};

// JSON array or JSON-lines of {question, query|sql|gold, db_id?}.
std::vector<EvalRecord> load_eval_records(const std::filesystem::path& path);

// Databases by id; records whose id is unknown or empty use the fallback.
struct DatabaseSet {
  std::map<std::string, const storage::Database*> by_id;
  const storage::Database* fallback = nullptr;

  const storage::Database* find(const std::string& id) const;
};

struct RecordOutcome {
  std::size_t index = 0;
  EvalRecord record;
  std::string pred;
  bool skipped = false;
  std::string skip_reason;
  bool em = false;
  EaResult ea;
  std::string generate_error;

  nlohmann::json to_json() const;
};

struct EvalReport {
  std::string backend;
  std::size_t records = 0;
  std::size_t evaluated = 0;
  std::size_t skipped = 0;
  std::size_t em = 0;
  std::size_t ea = 0;
  std::vector<RecordOutcome> outcomes;

  std::optional<Rational> em_rate() const;
  std::optional<Rational> ea_rate() const;
  nlohmann::json to_json() const;  // summary without per-record outcomes
};

struct EvalOptions {
  bool parallel = true;
  std::optional<std::filesystem::path> report_path;  // summary JSON
  std::optional<std::filesystem::path> log_path;     // per-record JSON-lines
};

// Records with unparseable or non-executing gold SQL are skipped and
// counted. Backend failures count as misses on both metrics.
EvalReport run_eval(const std::vector<EvalRecord>& records, const gen::Backend& backend, const DatabaseSet& dbs,
                    const EvalOptions& options = {});

// Column mapping for labelled injection corpora (delimited text with a
// header row).
struct CorpusFormat {
  std::string statement_column = "statement";
  std::string label_column = "label";
  std::string malicious_label = "1";
  std::string benign_label = "0";

  // {"statement_column", "label_column", "malicious_label", "benign_label"}
  static CorpusFormat from_json(const nlohmann::json& j);
};

struct LabelledStatement {
  std::string statement;
  Label label = Label::Benign;
};

// Rows with an empty statement or a label that is neither value are
// dropped; `dropped` receives their count.
std::vector<LabelledStatement> load_checker_corpus(const std::filesystem::path& path, const CorpusFormat& format = {},
                                                   std::size_t* dropped = nullptr);

struct CheckerReport {
  ConfusionCounts counts;
  CheckerMetrics metrics;
  std::optional<RocCurve> roc;  // needs both classes
  std::size_t dropped = 0;
  std::vector<check::CheckVerdict> verdicts;

  nlohmann::json to_json() const;
};

struct CheckerEvalOptions {
  bool parallel = true;
  std::optional<std::filesystem::path> report_path;
  std::optional<std::filesystem::path> log_path;
  std::optional<std::filesystem::path> roc_path;  // threshold,fpr,tpr rows
};

CheckerReport run_checker_eval(const std::vector<LabelledStatement>& corpus, const check::Checker& checker,
                               const CheckerEvalOptions& options = {});

}  // namespace streamlink::eval
