#include "streamlink/eval/harness.hpp"

#include <algorithm>
#include <exception>
#include <fstream>
#include <sstream>

#include "streamlink/sql/normalize.hpp"
#include "streamlink/sql/parser.hpp"
#include "streamlink/storage/executor.hpp"
#include "streamlink/strings.hpp"

namespace streamlink::eval {

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw EvalError("InvalidDataset", "cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<nlohmann::json> json_documents(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  std::vector<nlohmann::json> docs;
  try {
    auto doc = nlohmann::json::parse(text);
    if (doc.is_array()) {
      for (auto& d : doc) docs.push_back(std::move(d));
    } else {
      docs.push_back(std::move(doc));
    }
    return docs;
  } catch (const nlohmann::json::parse_error&) {
  }
  std::istringstream lines(text);
  std::string line;
  std::size_t n = 0;
  while (std::getline(lines, line)) {
    ++n;
    if (trim(line).empty()) continue;
    try {
      docs.push_back(nlohmann::json::parse(line));
    } catch (const nlohmann::json::exception& e) {
      throw EvalError("InvalidDataset", path.string() + " line " + std::to_string(n) + ": " + e.what());
    }
  }
  return docs;
}

std::optional<sql::Statement> try_parse(std::string_view text) {
  try {
    return sql::parse(text);
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

// Only single SELECTs execute; anything else is reported as an error.
storage::ResultSet run_select(std::string_view text, const storage::Database& db) {
  auto stmt = sql::parse(text);
  if (!stmt.is<sql::Select>()) throw Error("InvalidQuery", "only a single SELECT can be executed");
  return storage::execute(stmt.as<sql::Select>(), db);
}

bool same_rows(storage::ResultSet gold, storage::ResultSet pred) {
  if (gold.rows.size() != pred.rows.size()) return false;
  if (!gold.ordered) {
    std::sort(gold.rows.begin(), gold.rows.end());
    std::sort(pred.rows.begin(), pred.rows.end());
  }
  return gold.rows == pred.rows;
}

nlohmann::json rate_json(const std::optional<Rational>& r) {
  if (!r) return nullptr;
  return r->rounded();
}

template <class Fn>
void for_each_index(std::size_t n, bool parallel, Fn&& fn) {
  const auto count = static_cast<long>(n);
  if (!parallel) {
    for (long i = 0; i < count; ++i) fn(static_cast<std::size_t>(i));
    return;
  }
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < count; ++i) fn(static_cast<std::size_t>(i));
}

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw EvalError("IoError", "cannot write " + path.string());
  return out;
}

}  // namespace

bool exact_match(std::string_view gold, std::string_view pred) {
  auto g = try_parse(gold);
  auto p = try_parse(pred);
  return g && p && sql::normalize(*g) == sql::normalize(*p);
}

std::string_view to_string(EaOutcome o) {
  switch (o) {
    case EaOutcome::Match: return "match";
    case EaOutcome::Mismatch: return "mismatch";
    case EaOutcome::GoldError: return "error(gold)";
    case EaOutcome::PredError: return "error(pred)";
  }
  return "mismatch";
}

EaResult execution_accuracy(std::string_view gold, std::string_view pred, const storage::Database& db) {
  storage::ResultSet g, p;
  try {
    g = run_select(gold, db);
  } catch (const std::exception& e) {
    return {EaOutcome::GoldError, e.what()};
  }
  try {
    p = run_select(pred, db);
  } catch (const std::exception& e) {
    return {EaOutcome::PredError, e.what()};
  }
  return {same_rows(std::move(g), std::move(p)) ? EaOutcome::Match : EaOutcome::Mismatch, {}};
}

std::vector<EvalRecord> load_eval_records(const std::filesystem::path& path) {
  std::vector<EvalRecord> out;
  for (const auto& doc : json_documents(path)) {
    EvalRecord r;
    try {
      r.question = doc.at("question").get<std::string>();
      for (const char* key : {"query", "sql", "gold"}) {
        if (doc.contains(key)) {
          r.gold = doc.at(key).get<std::string>();
          break;
        }
      }
      if (doc.contains("db_id")) r.db_id = doc.at("db_id").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw EvalError("InvalidDataset", path.string() + ": record " + std::to_string(out.size() + 1) + ": " + e.what());
    }
    out.push_back(std::move(r));
  }
  return out;
}

const storage::Database* DatabaseSet::find(const std::string& id) const {
  auto it = by_id.find(id);
  return it != by_id.end() ? it->second : fallback;
}

nlohmann::json RecordOutcome::to_json() const {
  nlohmann::json j{{"index", index}, {"question", record.question}, {"gold", record.gold}, {"db_id", record.db_id}};
  if (skipped) {
    j["skipped"] = skip_reason;
    return j;
  }
  j["pred"] = pred;
  j["em"] = em;
  j["ea"] = std::string(to_string(ea.outcome));
  if (!ea.detail.empty()) j["ea_detail"] = ea.detail;
  if (!generate_error.empty()) j["generate_error"] = generate_error;
  return j;
}

std::optional<Rational> EvalReport::em_rate() const {
  if (evaluated == 0) return std::nullopt;
  return Rational::of(em, evaluated);
}

std::optional<Rational> EvalReport::ea_rate() const {
  if (evaluated == 0) return std::nullopt;
  return Rational::of(ea, evaluated);
}

nlohmann::json EvalReport::to_json() const {
  return {{"backend", backend},     {"records", records},         {"evaluated", evaluated},
          {"skipped", skipped},     {"em_count", em},             {"ea_count", ea},
          {"em_rate", rate_json(em_rate())}, {"ea_rate", rate_json(ea_rate())}};
}

EvalReport run_eval(const std::vector<EvalRecord>& records, const gen::Backend& backend, const DatabaseSet& dbs,
                    const EvalOptions& options) {
  if (records.empty()) throw EvalError("EmptyDataset", "no evaluation records");
  EvalReport report;
  report.backend = backend.id();
  report.records = records.size();
  report.outcomes.resize(records.size());

  for_each_index(records.size(), options.parallel, [&](std::size_t i) {
    RecordOutcome& out = report.outcomes[i];
    out.index = i;
    out.record = records[i];
    const storage::Database* db = dbs.find(out.record.db_id);
    if (db == nullptr) {
      out.skipped = true;
      out.skip_reason = "no database for db_id '" + out.record.db_id + "'";
      return;
    }
    if (!try_parse(out.record.gold)) {
      out.skipped = true;
      out.skip_reason = "gold SQL does not parse";
      return;
    }
    try {
      run_select(out.record.gold, *db);
    } catch (const std::exception& e) {
      out.skipped = true;
      out.skip_reason = std::string("gold SQL does not execute: ") + e.what();
      return;
    }
    try {
      gen::GenerationRequest req;
      req.nl_query = out.record.question;
      req.schema = &db->schema();
      auto res = backend.generate(req);
      if (!res.candidates.empty()) out.pred = res.candidates.front();
    } catch (const Error& e) {
      out.generate_error = e.code() + ": " + e.what();
    }
    out.em = exact_match(out.record.gold, out.pred);
    if (out.pred.empty()) {
      out.ea = {EaOutcome::PredError, out.generate_error.empty() ? "no prediction" : out.generate_error};
    } else {
      out.ea = execution_accuracy(out.record.gold, out.pred, *db);
    }
  });

  for (const auto& o : report.outcomes) {
    if (o.skipped) {
      ++report.skipped;
      continue;
    }
    ++report.evaluated;
    if (o.em) ++report.em;
    if (o.ea.outcome == EaOutcome::Match) ++report.ea;
  }
  if (options.report_path) open_out(*options.report_path) << report.to_json().dump(2) << '\n';
  if (options.log_path) {
    auto log = open_out(*options.log_path);
    for (const auto& o : report.outcomes) {
      log << o.to_json().dump(-1, ' ', false, nlohmann::json::error_handler_t::replace) << '\n';
    }
  }
  return report;
}

CorpusFormat CorpusFormat::from_json(const nlohmann::json& j) {
  CorpusFormat f;
  try {
    if (j.contains("statement_column")) f.statement_column = j.at("statement_column").get<std::string>();
    if (j.contains("label_column")) f.label_column = j.at("label_column").get<std::string>();
    if (j.contains("malicious_label")) f.malicious_label = j.at("malicious_label").get<std::string>();
    if (j.contains("benign_label")) f.benign_label = j.at("benign_label").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw EvalError("InvalidDataset", std::string("bad corpus format: ") + e.what());
  }
  return f;
}

std::vector<LabelledStatement> load_checker_corpus(const std::filesystem::path& path, const CorpusFormat& format,
                                                   std::size_t* dropped) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw EvalError("InvalidDataset", "cannot open " + path.string());
  std::vector<std::vector<std::string>> rows;
  try {
    rows = storage::read_csv(in);
  } catch (const Error& e) {
    throw EvalError("InvalidDataset", path.string() + ": " + e.what());
  }
  if (rows.empty()) throw EvalError("InvalidDataset", path.string() + " has no header row");
  auto column = [&](const std::string& name) {
    const auto& header = rows.front();
    for (std::size_t i = 0; i < header.size(); ++i) {
      auto h = trim(header[i]);
      if (i == 0 && h.substr(0, 3) == "\xEF\xBB\xBF") h.remove_prefix(3);
      if (iequals(h, name)) return i;
    }
    throw EvalError("InvalidDataset", path.string() + " has no column '" + name + "'");
  };
  const std::size_t stmt_col = column(format.statement_column);
  const std::size_t label_col = column(format.label_column);
  std::vector<LabelledStatement> out;
  std::size_t skipped = 0;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() <= std::max(stmt_col, label_col) || trim(row[stmt_col]).empty()) {
      ++skipped;
      continue;
    }
    auto label = trim(row[label_col]);
    if (label == format.malicious_label) {
      out.push_back({row[stmt_col], Label::Malicious});
    } else if (label == format.benign_label) {
      out.push_back({row[stmt_col], Label::Benign});
    } else {
      ++skipped;
    }
  }
  if (dropped != nullptr) *dropped = skipped;
  return out;
}

nlohmann::json CheckerReport::to_json() const {
  nlohmann::json j{{"total", verdicts.size()},
                   {"dropped", dropped},
                   {"counts", counts.to_json()},
                   {"metrics", metrics.to_json()}};
  j["auc"] = roc ? nlohmann::json(roc->auc) : nlohmann::json();
  return j;
}

CheckerReport run_checker_eval(const std::vector<LabelledStatement>& corpus, const check::Checker& checker,
                               const CheckerEvalOptions& options) {
  if (corpus.empty()) throw EvalError("EmptyDataset", "no labelled statements");
  std::vector<std::string> statements;
  std::vector<Label> labels;
  for (const auto& s : corpus) {
    statements.push_back(s.statement);
    labels.push_back(s.label);
  }
  CheckerReport report;
  report.verdicts = checker.check_batch(statements, options.parallel);
  std::vector<check::Security> verdicts;
  std::vector<double> scores;
  for (const auto& v : report.verdicts) {
    verdicts.push_back(v.security);
    scores.push_back(v.score);
  }
  report.counts = confusion(labels, verdicts);
  report.metrics = metrics(report.counts);
  bool both = report.counts.tp + report.counts.fn > 0 && report.counts.fp + report.counts.tn > 0;
  if (both) report.roc = roc_auc(scores, labels);

  if (options.report_path) open_out(*options.report_path) << report.to_json().dump(2) << '\n';
  if (options.log_path) {
    auto log = open_out(*options.log_path);
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      nlohmann::json j{{"index", i},
                       {"statement", corpus[i].statement},
                       {"label", corpus[i].label == Label::Malicious ? "malicious" : "benign"},
                       {"verdict", report.verdicts[i].to_json()}};
      log << j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace) << '\n';
    }
  }
  if (options.roc_path && report.roc) open_out(*options.roc_path) << roc_csv(*report.roc);
  return report;
}

}  // namespace streamlink::eval
