// streamlink: operator entry point. Exit codes: 0 success, 1 operational
// error (one JSON line on stderr), 2 usage error.

#include <CLI11.hpp>
#include <json.hpp>

#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <pthread.h>
#include <thread>

#include "streamlink/augment/augment.hpp"
#include "streamlink/check/checker.hpp"
#include "streamlink/eval/harness.hpp"
#include "streamlink/gateway/gateway.hpp"
#include "streamlink/gateway/server.hpp"
#include "streamlink/gen/remote_backend.hpp"
#include "streamlink/gen/template_backend.hpp"
#include "streamlink/storage/snapshot.hpp"
#include "streamlink/storage/synthetic.hpp"

namespace sl = streamlink;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Globals {
  std::string config;
  int verbosity = 0;
  bool json_out = false;
  std::uint64_t seed = sl::storage::synthetic::kDefaultSeed;
};

// Raised for bad flag combinations that CLI11 cannot express.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Globals g;

void log(int level, const std::string& msg) {
  if (g.verbosity >= level) std::cerr << "streamlink: " << msg << "\n";
}

std::string config_path() {
  if (!g.config.empty()) return g.config;
  if (const char* env = std::getenv("STREAMLINK_CONFIG"); env != nullptr && *env != '\0') return env;
  return STREAMLINK_DEFAULT_CONFIG;
}

sl::gateway::GatewayConfig load_config() {
  auto path = config_path();
  log(1, "config " + path);
  auto c = sl::gateway::GatewayConfig::load(path);
  c.apply_env();
  return c;
}

void write_json(std::ostream& out, const json& j) { out << j.dump(2, ' ', false, json::error_handler_t::replace) << "\n"; }

std::string cell(const sl::storage::Value& v) { return sl::storage::to_text(v); }

void print_table(const sl::storage::ResultSet& rs) {
  std::vector<std::size_t> width(rs.columns.size());
  for (std::size_t c = 0; c < rs.columns.size(); ++c) width[c] = rs.columns[c].size();
  for (const auto& row : rs.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], cell(row[c]).size());
  }
  auto line = [&](auto&& get) {
    for (std::size_t c = 0; c < width.size(); ++c) {
      if (c > 0) std::cout << "  ";
      if (c + 1 < width.size()) std::cout << std::left << std::setw(static_cast<int>(width[c]));
      std::cout << get(c);
    }
    std::cout << "\n";
  };
  line([&](std::size_t c) { return rs.columns[c]; });
  line([&](std::size_t c) { return std::string(width[c], '-'); });
  for (const auto& row : rs.rows) line([&](std::size_t c) { return cell(row[c]); });
}

// ---- gen-data ----

struct GenDataArgs {
  std::string out;
  std::size_t rows = sl::storage::synthetic::kDefaultRows;
};

int cmd_gen_data(const GenDataArgs& a) {
  auto rows = sl::storage::synthetic::generate(g.seed, a.rows);
  std::ofstream out(a.out, std::ios::binary);
  if (!out) throw sl::Error("IoError", "cannot write " + a.out);
  sl::storage::synthetic::write_csv(rows, out);
  if (g.json_out) {
    write_json(std::cout, {{"out", a.out}, {"rows", rows.size()}, {"seed", g.seed}});
  } else {
    std::cout << "wrote " << rows.size() << " rows to " << a.out << "\n";
  }
  return 0;
}

// ---- ingest ----

struct IngestArgs {
  std::string table;
  std::string file;
  std::string key;
  std::string out;
  std::size_t shards = 0;
};

int cmd_ingest(const IngestArgs& a) {
  auto config = load_config();
  auto schema = sl::sql::Schema::load(config.schema);
  sl::storage::Database db(schema, a.shards ? a.shards : config.shards);
  auto n = db.ingest_file(a.table, a.file, a.key);
  const auto& t = db.table(a.table);
  if (!a.out.empty()) {
    fs::create_directories(a.out);
    sl::storage::write_snapshots(t, a.out);
  }
  auto sizes = t.shard_sizes();
  if (g.json_out) {
    write_json(std::cout, {{"table", t.def().name}, {"rows", n}, {"shards", sizes}, {"snapshot_dir", a.out}});
  } else {
    std::cout << "ingested " << n << " rows into " << t.def().name << " across " << sizes.size() << " shards:";
    for (auto s : sizes) std::cout << " " << s;
    std::cout << "\n";
    if (!a.out.empty()) std::cout << "snapshots in " << a.out << "\n";
  }
  return 0;
}

// ---- query ----

struct QueryArgs {
  std::string nl;
  std::string sql;
};

int cmd_query(const QueryArgs& a) {
  if (a.nl.empty() == a.sql.empty()) throw UsageError("query needs exactly one of --nl or --sql");
  auto gw = sl::gateway::Gateway::from_config(load_config());
  auto out = gw->handle_query({a.nl, a.sql});
  if (g.json_out) {
    write_json(std::cout, out.to_json());
  } else {
    std::cout << "SQL: " << out.sql << "\n";
    if (out.verdict) {
      std::cout << "verdict: " << (out.verdict->blocked() ? "Block" : "Allow");
      for (const auto& h : out.verdict->hits) std::cout << " [" << h.rule << " " << h.fragment << "]";
      std::cout << "\n";
    }
    if (out.rows) {
      print_table(*out.rows);
      std::cout << "(" << out.rows->rows.size() << " rows)\n";
    }
    if (out.refused) std::cout << "refused: " << out.reason << "\n";
    const auto& t = out.trace.times;
    std::cout << std::fixed << std::setprecision(2) << "time: generate " << t.generate.count() / 1000.0
              << " ms, check " << t.check.count() / 1000.0 << " ms, execute " << t.execute.count() / 1000.0
              << " ms, total " << t.total.count() / 1000.0 << " ms\n";
  }
  if (!out.error_code.empty()) throw sl::Error(out.error_code, out.error_stage + ": " + out.error_message);
  if (out.refused) throw sl::Error("Refused", out.reason);
  return 0;
}

// ---- augment ----

struct AugmentArgs {
  std::vector<std::string> templates;
  std::string open;
  std::string ratio = "1:1";
  std::string mode = "cartesian";
  std::string out;
};

int cmd_augment(const AugmentArgs& a) {
  auto mode = a.mode == "aligned" ? sl::augment::ExpandMode::Aligned : sl::augment::ExpandMode::Cartesian;
  std::vector<sl::augment::TemplateSet> sets;
  for (const auto& p : a.templates) {
    fs::path path(p);
    std::vector<fs::path> files;
    if (fs::is_directory(path)) {
      for (const auto& e : fs::directory_iterator(path)) {
        if (e.path().extension() == ".json") files.push_back(e.path());
      }
      std::sort(files.begin(), files.end());
    } else {
      files.push_back(path);
    }
    for (const auto& f : files) {
      auto loaded = sl::augment::load_templates(f);
      log(1, f.string() + ": " + std::to_string(loaded.size()) + " template sets");
      sets.insert(sets.end(), loaded.begin(), loaded.end());
    }
  }
  auto domain = sl::augment::expand_all(sets, mode);
  std::vector<sl::augment::Pair> open;
  if (!a.open.empty()) open = sl::augment::load_open_corpus(a.open);
  auto mixed = sl::augment::mix(domain, open, sl::augment::Ratio::parse(a.ratio), g.seed);
  {
    std::ofstream out(a.out, std::ios::binary);
    if (!out) throw sl::Error("IoError", "cannot write " + a.out);
    sl::augment::write_jsonl(mixed.pairs, out);
  }
  json summary{{"out", a.out},          {"pairs", mixed.pairs.size()}, {"domain", mixed.domain_count},
               {"open", mixed.open_count}, {"domain_available", domain.size()}, {"seed", g.seed}};
  if (g.json_out) {
    write_json(std::cout, summary);
  } else {
    std::cout << "wrote " << mixed.pairs.size() << " pairs (" << mixed.domain_count << " domain, "
              << mixed.open_count << " open) to " << a.out << "\n";
  }
  return 0;
}

// ---- eval-nl2sql ----

struct EvalArgs {
  std::string dataset;
  std::string backend = "template";
  std::string out;
  std::string log;
};

std::unique_ptr<sl::gen::Backend> make_backend(const std::string& spec, const sl::gateway::GatewayConfig& config) {
  if (spec == "template") {
    if (!config.synonyms) throw UsageError("the template backend needs \"synonyms\" in the config");
    return std::make_unique<sl::gen::TemplateBackend>(sl::gen::SynonymMap::load(*config.synonyms));
  }
  if (spec.rfind("replay:", 0) == 0) {
    return std::make_unique<sl::gen::ReplayBackend>(sl::gen::ReplayBackend::load(spec.substr(7)));
  }
  if (spec.rfind("remote:", 0) == 0) {
    std::vector<sl::gen::Exemplar> exemplars;
    if (config.exemplars) exemplars = sl::gen::load_exemplars(config.exemplars->string());
    sl::net::CompletionClient client(sl::net::Endpoint::parse(spec.substr(7)), {});
    return std::make_unique<sl::gen::RemoteBackend>("remote", client, exemplars);
  }
  throw UsageError("--backend must be template, replay:<file> or remote:<url>");
}

int cmd_eval_nl2sql(const EvalArgs& a) {
  auto config = load_config();
  auto backend = make_backend(a.backend, config);
  auto gw = sl::gateway::Gateway::from_config(config);
  auto records = sl::eval::load_eval_records(a.dataset);
  log(1, std::to_string(records.size()) + " records");
  sl::eval::DatabaseSet dbs;
  dbs.fallback = &gw->database();
  sl::eval::EvalOptions opts;
  if (!a.out.empty()) opts.report_path = a.out;
  if (!a.log.empty()) opts.log_path = a.log;
  auto report = sl::eval::run_eval(records, *backend, dbs, opts);
  write_json(std::cout, report.to_json());
  return 0;
}

// ---- eval-checker ----

struct CheckerArgs {
  std::string corpus;
  std::string policy;
  std::string format;
  std::string classifier;
  std::string out;
  std::string log;
  std::string roc;
};

int cmd_eval_checker(const CheckerArgs& a) {
  sl::check::SecurityPolicy policy;
  if (!a.policy.empty()) {
    policy = sl::check::SecurityPolicy::load(a.policy);
  } else if (auto c = load_config(); c.policy) {
    policy = sl::check::SecurityPolicy::load(*c.policy);
  }
  sl::eval::CorpusFormat format;
  if (!a.format.empty()) {
    std::ifstream in(a.format);
    if (!in) throw sl::Error("IoError", "cannot open " + a.format);
    format = sl::eval::CorpusFormat::from_json(json::parse(in));
  }
  std::shared_ptr<const sl::check::Classifier> classifier;
  if (!a.classifier.empty()) {
    sl::net::CompletionOptions opts;
    opts.max_tokens = 8;
    classifier = std::make_shared<sl::check::RemoteClassifier>(
        sl::net::CompletionClient(sl::net::Endpoint::parse(a.classifier), opts));
  }
  sl::check::Checker checker(policy, nullptr, classifier);
  std::size_t dropped = 0;
  auto corpus = sl::eval::load_checker_corpus(a.corpus, format, &dropped);
  log(1, std::to_string(corpus.size()) + " statements, " + std::to_string(dropped) + " dropped");
  sl::eval::CheckerEvalOptions opts;
  if (!a.out.empty()) opts.report_path = a.out;
  if (!a.log.empty()) opts.log_path = a.log;
  if (!a.roc.empty()) opts.roc_path = a.roc;
  auto report = sl::eval::run_checker_eval(corpus, checker, opts);
  report.dropped = dropped;
  write_json(std::cout, report.to_json());
  return 0;
}

// ---- serve ----

struct ServeArgs {
  std::string listen;
  std::string ui_dir;
};

int cmd_serve(const ServeArgs& a) {
  auto config = load_config();
  if (!a.listen.empty()) {
    auto colon = a.listen.rfind(':');
    if (colon == std::string::npos) throw UsageError("--listen must be host:port");
    config.host = a.listen.substr(0, colon);
    config.port = std::stoi(a.listen.substr(colon + 1));
  }
  if (!a.ui_dir.empty()) config.ui_dir = a.ui_dir;

  // Block the stop signals before any thread starts; one thread waits on them.
  sigset_t stop_signals;
  sigemptyset(&stop_signals);
  sigaddset(&stop_signals, SIGINT);
  sigaddset(&stop_signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &stop_signals, nullptr);

  auto gw = sl::gateway::Gateway::from_config(config);
  sl::gateway::HealthProber prober(gw->registry(), sl::gateway::http_probe(config.probe_timeout),
                                   config.probe_interval);
  prober.probe_once();
  prober.start();
  sl::gateway::HttpServer server(*gw, config.ui_dir);
  std::jthread waiter([&] {
    int sig = 0;
    sigwait(&stop_signals, &sig);
    log(1, "signal " + std::to_string(sig) + ", stopping");
    server.stop();
  });
  int port = server.start(config.host, config.port);
  std::cerr << "streamlink: listening on http://" << config.host << ":" << port << " (backend mode "
            << sl::gateway::to_string(gw->mode()) << ")\n";
  waiter.join();
  prober.stop();
  return 0;
}

void fail_record(const std::string& command, const std::string& code, const std::string& message) {
  std::cerr << json{{"error", {{"command", command}, {"code", code}, {"message", message}}}}.dump(
                   -1, ' ', false, json::error_handler_t::replace)
            << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"StreamLink: guarded natural-language querying over a sharded patent table"};
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("-c,--config", g.config, "Gateway config file (default: bundled data/gateway.json)");
  app.add_flag("-v,--verbose", g.verbosity, "More log output on stderr (repeatable)");
  app.add_flag("--json", g.json_out, "Machine-readable output");
  app.add_option("--seed", g.seed, "Seed for every random choice");

  GenDataArgs gen_args;
  auto* gen = app.add_subcommand("gen-data", "Write the synthetic patent table as CSV");
  gen->add_option("-o,--out", gen_args.out, "Output CSV")->required();
  gen->add_option("--rows", gen_args.rows, "Row count")->check(CLI::PositiveNumber);

  IngestArgs ingest_args;
  auto* ingest = app.add_subcommand("ingest", "Load a CSV or JSON-lines file and write shard snapshots");
  ingest->add_option("--table", ingest_args.table, "Target table")->required();
  ingest->add_option("--file", ingest_args.file, "Input file (.csv or .jsonl)")->required()->check(CLI::ExistingFile);
  ingest->add_option("--key", ingest_args.key, "Partition key column")->required();
  ingest->add_option("-o,--out", ingest_args.out, "Snapshot directory");
  ingest->add_option("--shards", ingest_args.shards, "Shard count (default: from config)");

  QueryArgs query_args;
  auto* query = app.add_subcommand("query", "Run one request through generate, check and execute");
  auto* nl_opt = query->add_option("--nl", query_args.nl, "Question in English");
  auto* sql_opt = query->add_option("--sql", query_args.sql, "SQL to check and run");
  nl_opt->excludes(sql_opt);

  AugmentArgs aug_args;
  auto* augment = app.add_subcommand("augment", "Expand templates and mix with an open corpus");
  augment->add_option("--templates", aug_args.templates, "Template files or directories")->required();
  augment->add_option("--open", aug_args.open, "Open text-to-SQL corpus (JSON or JSON-lines)");
  augment->add_option("--ratio", aug_args.ratio, "domain:open ratio, e.g. 1:1");
  augment->add_option("--mode", aug_args.mode, "cartesian or aligned")
      ->check(CLI::IsMember({"cartesian", "aligned"}));
  augment->add_option("-o,--out", aug_args.out, "Output JSON-lines")->required();

  EvalArgs eval_args;
  auto* eval = app.add_subcommand("eval-nl2sql", "Exact-match and execution accuracy of a backend");
  eval->add_option("--dataset", eval_args.dataset, "Records: JSON array or JSON-lines")->required();
  eval->add_option("--backend", eval_args.backend, "template, replay:<file> or remote:<url>");
  eval->add_option("-o,--out", eval_args.out, "Report JSON");
  eval->add_option("--log", eval_args.log, "Per-record JSON-lines");

  CheckerArgs chk_args;
  auto* chk = app.add_subcommand("eval-checker", "Confusion counts, metrics and ROC of the checker");
  chk->add_option("--corpus", chk_args.corpus, "Labelled CSV corpus")->required();
  chk->add_option("--policy", chk_args.policy, "Policy JSON (default: from config)");
  chk->add_option("--format", chk_args.format, "Column mapping JSON");
  chk->add_option("--classifier", chk_args.classifier, "Classifier completion endpoint URL");
  chk->add_option("-o,--out", chk_args.out, "Report JSON");
  chk->add_option("--log", chk_args.log, "Per-statement JSON-lines");
  chk->add_option("--roc", chk_args.roc, "ROC points CSV");

  ServeArgs serve_args;
  auto* serve = app.add_subcommand("serve", "Run the HTTP gateway");
  serve->add_option("--listen", serve_args.listen, "host:port (overrides config)");
  serve->add_option("--ui-dir", serve_args.ui_dir, "Static console files served at /");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    if (command == "gen-data") return cmd_gen_data(gen_args);
    if (command == "ingest") return cmd_ingest(ingest_args);
    if (command == "query") return cmd_query(query_args);
    if (command == "augment") return cmd_augment(aug_args);
    if (command == "eval-nl2sql") return cmd_eval_nl2sql(eval_args);
    if (command == "eval-checker") return cmd_eval_checker(chk_args);
    if (command == "serve") return cmd_serve(serve_args);
  } catch (const UsageError& e) {
    std::cerr << e.what() << "\n" << app.get_subcommands().front()->help();
    return 2;
  } catch (const sl::Error& e) {
    fail_record(command, e.code(), e.what());
    return 1;
  } catch (const json::exception& e) {
    fail_record(command, "InvalidJson", e.what());
    return 1;
  } catch (const std::exception& e) {
    fail_record(command, "Internal", e.what());
    return 1;
  }
  return 2;
}
