#include "streamlink/gateway/gateway.hpp"

#include <cstdlib>
#include <iomanip>
#include <sstream>

#include "streamlink/gen/prompt.hpp"
#include "streamlink/gen/remote_backend.hpp"
#include "streamlink/gen/template_backend.hpp"
#include "streamlink/strings.hpp"

namespace streamlink::gateway {

namespace {

using Clock = std::chrono::steady_clock;

std::chrono::microseconds since(Clock::time_point start) {
  return std::chrono::duration_cast<std::chrono::microseconds>(Clock::now() - start);
}

double ms(std::chrono::microseconds us) { return static_cast<double>(us.count()) / 1000.0; }

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

std::vector<RemoteNodeConfig> nodes_from_urls(std::string_view list, std::string_view prefix,
                                              std::chrono::milliseconds timeout) {
  std::vector<RemoteNodeConfig> out;
  for (const auto& part : split(list, ',')) {
    auto url = trim(part);
    if (url.empty()) continue;
    out.push_back({std::string(prefix) + "-" + std::to_string(out.size() + 1), std::string(url), timeout, nlohmann::json::object()});
  }
  return out;
}

std::vector<RemoteNodeConfig> parse_nodes(const nlohmann::json& j, std::string_view prefix) {
  std::vector<RemoteNodeConfig> out;
  for (const auto& n : j) {
    RemoteNodeConfig c;
    c.url = n.at("url").get<std::string>();
    c.id = n.value("id", std::string(prefix) + "-" + std::to_string(out.size() + 1));
    c.timeout = std::chrono::milliseconds(n.value("timeout_ms", 30'000));
    if (n.contains("adapter")) c.adapter = n.at("adapter");
    out.push_back(std::move(c));
  }
  return out;
}

nlohmann::json value_json(const storage::Value& v) {
  return std::visit([](const auto& x) { return nlohmann::json(x); }, v);
}

// Routes each call to the next healthy classifier node.
class BalancedClassifier : public check::Classifier {
 public:
  BalancedClassifier(NodeRegistry& registry, std::map<std::string, std::shared_ptr<const check::Classifier>> nodes)
      : registry_(registry), nodes_(std::move(nodes)) {}

  double score(std::string_view sql) const override {
    return nodes_.at(registry_.balance(NodeRole::Classifier))->score(sql);
  }

 private:
  NodeRegistry& registry_;
  std::map<std::string, std::shared_ptr<const check::Classifier>> nodes_;
};

template <class T>
std::map<std::string, std::shared_ptr<const T>> bind_nodes(NodeRegistry& registry,
                                                           const std::vector<NodeBinding<T>>& bindings) {
  std::map<std::string, std::shared_ptr<const T>> out;
  for (const auto& b : bindings) {
    registry.add(b.spec, b.healthy);
    out[b.spec.id] = b.impl;
  }
  return out;
}

}  // namespace

std::string_view to_string(BackendMode m) {
  switch (m) {
    case BackendMode::Template: return "template";
    case BackendMode::TemplateFirst: return "template-first";
    case BackendMode::Remote: return "remote";
    case BackendMode::RemoteFirst: return "remote-first";
  }
  return "template";
}

BackendMode parse_backend_mode(std::string_view s) {
  for (auto m : {BackendMode::Template, BackendMode::TemplateFirst, BackendMode::Remote, BackendMode::RemoteFirst}) {
    if (iequals(to_string(m), s)) return m;
  }
  throw GatewayError("InvalidConfig", "unknown backend mode '" + std::string(s) + "'");
}

GatewayConfig GatewayConfig::from_json(const nlohmann::json& j, const std::filesystem::path& base) {
  GatewayConfig c;
  try {
    if (j.contains("listen")) {
      auto listen = j.at("listen").get<std::string>();
      auto colon = listen.rfind(':');
      if (colon == std::string::npos) throw GatewayError("InvalidConfig", "listen must be host:port");
      c.host = listen.substr(0, colon);
      c.port = std::stoi(listen.substr(colon + 1));
    }
    c.schema = resolve(base, j.at("schema").get<std::string>());
    for (const auto& d : j.value("data", nlohmann::json::array())) {
      c.data.push_back({d.at("table").get<std::string>(), resolve(base, d.at("file").get<std::string>()),
                        d.at("key").get<std::string>()});
    }
    c.shards = j.value("shards", std::size_t{3});
    if (j.contains("policy")) c.policy = resolve(base, j.at("policy").get<std::string>());
    if (j.contains("backend_mode")) c.backend_mode = parse_backend_mode(j.at("backend_mode").get<std::string>());
    if (j.contains("synonyms")) c.synonyms = resolve(base, j.at("synonyms").get<std::string>());
    if (j.contains("exemplars")) c.exemplars = resolve(base, j.at("exemplars").get<std::string>());
    if (j.contains("generators")) c.generators = parse_nodes(j.at("generators"), "generator");
    if (j.contains("classifiers")) c.classifiers = parse_nodes(j.at("classifiers"), "classifier");
    if (j.contains("classifier_prompt")) c.classifier_prompt = resolve(base, j.at("classifier_prompt").get<std::string>());
    if (j.contains("probe")) {
      const auto& p = j.at("probe");
      c.probe_interval = std::chrono::milliseconds(p.value("interval_ms", 2000));
      c.probe_timeout = std::chrono::milliseconds(p.value("timeout_ms", 2000));
      c.health.failures_to_unhealthy = p.value("failures", 3u);
      c.health.successes_to_healthy = p.value("successes", 2u);
    }
    if (j.contains("audit_log")) c.audit_log = resolve(base, j.at("audit_log").get<std::string>());
    if (j.contains("ui_dir")) c.ui_dir = resolve(base, j.at("ui_dir").get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw GatewayError("InvalidConfig", e.what());
  } catch (const std::logic_error& e) {
    throw GatewayError("InvalidConfig", std::string("bad number in config: ") + e.what());
  }
  if (c.shards == 0) throw GatewayError("InvalidConfig", "shards must be at least 1");
  return c;
}

GatewayConfig GatewayConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw GatewayError("InvalidConfig", "cannot open " + path.string());
  try {
    return from_json(nlohmann::json::parse(in), path.parent_path());
  } catch (const nlohmann::json::exception& e) {
    throw GatewayError("InvalidConfig", path.string() + ": " + e.what());
  }
}

void GatewayConfig::apply_env() {
  if (const char* listen = std::getenv("STREAMLINK_LISTEN"); listen != nullptr && *listen != '\0') {
    std::string s(listen);
    auto colon = s.rfind(':');
    if (colon == std::string::npos) throw GatewayError("InvalidConfig", "STREAMLINK_LISTEN must be host:port");
    host = s.substr(0, colon);
    try {
      port = std::stoi(s.substr(colon + 1));
    } catch (const std::logic_error&) {
      throw GatewayError("InvalidConfig", "STREAMLINK_LISTEN has a bad port");
    }
  }
  if (const char* urls = std::getenv("STREAMLINK_GENERATOR_URLS"); urls != nullptr) {
    generators = nodes_from_urls(urls, "generator", std::chrono::milliseconds(30'000));
  }
  if (const char* urls = std::getenv("STREAMLINK_CLASSIFIER_URLS"); urls != nullptr) {
    classifiers = nodes_from_urls(urls, "classifier", std::chrono::milliseconds(10'000));
  }
  if (const char* mode = std::getenv("STREAMLINK_BACKEND_MODE"); mode != nullptr && *mode != '\0') {
    backend_mode = parse_backend_mode(mode);
  }
}

nlohmann::json PipelineTrace::to_json() const {
  nlohmann::json j{{"request_id", request_id},
                   {"generate_ms", ms(times.generate)},
                   {"check_ms", ms(times.check)},
                   {"execute_ms", ms(times.execute)},
                   {"total_ms", ms(times.total)},
                   {"backend", backend}};
  j["verdict"] = verdict ? nlohmann::json(*verdict == check::Security::Block ? "Block" : "Allow") : nlohmann::json();
  j["row_count"] = row_count ? nlohmann::json(*row_count) : nlohmann::json();
  if (!refusal.empty()) j["refusal"] = refusal;
  return j;
}

nlohmann::json QueryOutcome::to_json() const {
  nlohmann::json j{{"nl", nl}, {"sql", sql}, {"refused", refused}, {"trace", trace.to_json()}};
  j["verdict"] = verdict ? verdict->to_json() : nlohmann::json();
  if (rows) {
    j["columns"] = rows->columns;
    nlohmann::json data = nlohmann::json::array();
    for (const auto& row : rows->rows) {
      nlohmann::json r = nlohmann::json::array();
      for (const auto& v : row) r.push_back(value_json(v));
      data.push_back(std::move(r));
    }
    j["rows"] = std::move(data);
    j["row_count"] = rows->rows.size();
  }
  if (refused) j["reason"] = reason;
  if (!error_code.empty()) j["error"] = {{"code", error_code}, {"message", error_message}, {"stage", error_stage}};
  return j;
}

Gateway::Gateway(GatewayParts parts)
    : db_(std::move(parts.db)),
      mode_(parts.mode),
      registry_(parts.health),
      template_backend_(std::move(parts.template_backend)),
      generators_(bind_nodes(registry_, parts.generators)),
      classifiers_(bind_nodes(registry_, parts.classifiers)),
      checker_(parts.policy, &db_->schema(),
               classifiers_.empty() ? nullptr : std::make_shared<BalancedClassifier>(registry_, classifiers_)),
      executor_(db_, registry_, parts.shard_worker) {
  executor_.register_nodes();
  bool needs_template = mode_ != BackendMode::Remote;
  bool needs_remote = mode_ == BackendMode::Remote || mode_ == BackendMode::RemoteFirst;
  if (needs_template && !template_backend_) throw GatewayError("InvalidConfig", "backend mode needs the template backend");
  if (needs_remote && generators_.empty()) throw GatewayError("InvalidConfig", "backend mode needs generator nodes");
  if (parts.audit_log) {
    if (parts.audit_log->has_parent_path()) std::filesystem::create_directories(parts.audit_log->parent_path());
    audit_.emplace(*parts.audit_log, std::ios::app | std::ios::binary);
    if (!*audit_) throw GatewayError("InvalidConfig", "cannot open audit log " + parts.audit_log->string());
  }
}

std::unique_ptr<Gateway> Gateway::from_config(const GatewayConfig& config) {
  auto schema = sql::Schema::load(config.schema);
  auto db = std::make_shared<storage::Database>(schema, config.shards);
  for (const auto& d : config.data) db->ingest_file(d.table, d.file, d.key);

  GatewayParts parts;
  parts.db = db;
  parts.policy = config.policy ? check::SecurityPolicy::load(*config.policy) : check::SecurityPolicy{};
  parts.mode = config.backend_mode;
  parts.health = config.health;
  parts.audit_log = config.audit_log;
  if (schema.tables().empty()) throw GatewayError("InvalidConfig", "schema has no tables");
  auto synonyms = config.synonyms ? gen::SynonymMap::load(config.synonyms->string())
                                  : gen::SynonymMap::defaults_for(schema.tables().front());
  parts.template_backend = std::make_shared<gen::TemplateBackend>(std::move(synonyms));

  std::vector<gen::Exemplar> exemplars;
  if (config.exemplars) exemplars = gen::load_exemplars(config.exemplars->string());
  for (const auto& g : config.generators) {
    net::CompletionOptions opts;
    opts.timeout = g.timeout;
    opts.adapter = net::CompletionAdapter::from_json(g.adapter);
    net::CompletionClient client(net::Endpoint::parse(g.url), opts);
    parts.generators.push_back(
        {{g.id, NodeRole::Generator, g.url}, std::make_shared<gen::RemoteBackend>(g.id, client, exemplars), false});
  }
  std::string prompt = config.classifier_prompt ? check::RemoteClassifier::load_prompt(*config.classifier_prompt)
                                                : check::RemoteClassifier::default_prompt();
  for (const auto& c : config.classifiers) {
    net::CompletionOptions opts;
    opts.timeout = c.timeout;
    opts.max_tokens = 8;
    opts.adapter = net::CompletionAdapter::from_json(c.adapter);
    net::CompletionClient client(net::Endpoint::parse(c.url), opts);
    parts.classifiers.push_back(
        {{c.id, NodeRole::Classifier, c.url}, std::make_shared<check::RemoteClassifier>(client, prompt), false});
  }
  return std::make_unique<Gateway>(std::move(parts));
}

gen::GenerationResult Gateway::generate_remote(const gen::GenerationRequest& req) {
  auto id = registry_.balance(NodeRole::Generator);
  auto res = generators_.at(id)->generate(req);
  res.backend = id;
  return res;
}

gen::GenerationResult Gateway::generate(const std::string& nl) {
  gen::GenerationRequest req;
  req.nl_query = nl;
  req.schema = &db_->schema();
  switch (mode_) {
    case BackendMode::Template:
      return template_backend_->generate(req);
    case BackendMode::TemplateFirst:
      try {
        return template_backend_->generate(req);
      } catch (const gen::GenerateError& e) {
        if (e.code() != "NoMatch" || generators_.empty()) throw;
      }
      return generate_remote(req);
    case BackendMode::Remote:
      return generate_remote(req);
    case BackendMode::RemoteFirst:
      try {
        return generate_remote(req);
      } catch (const Error&) {
      }
      return template_backend_->generate(req);
  }
  throw GatewayError("InvalidConfig", "unknown backend mode");
}

check::CheckVerdict Gateway::check(const std::string& sql) const { return checker_.check(sql); }

QueryOutcome Gateway::handle_query(const QueryRequest& request) {
  const auto start = Clock::now();
  QueryOutcome out;
  std::ostringstream id;
  id << "req-" << std::setw(6) << std::setfill('0') << ++request_counter_;
  out.trace.request_id = id.str();
  out.nl = request.nl;

  auto fail = [&](const std::string& stage, const Error& e) {
    out.error_stage = stage;
    out.error_code = e.code();
    out.error_message = e.what();
  };
  auto finish = [&]() -> QueryOutcome {
    out.trace.times.total = since(start);
    audit(out);
    return out;
  };

  if (!trim(request.sql).empty()) {
    out.sql = request.sql;
    out.trace.backend = "user";
  } else {
    const auto t = Clock::now();
    try {
      if (trim(request.nl).empty()) throw gen::GenerateError("InvalidArgument", "request needs \"nl\" or \"sql\"");
      auto res = generate(request.nl);
      out.trace.backend = res.backend;
      if (res.candidates.empty()) throw gen::GenerateError("EmptyCompletion", "backend returned no SQL");
      out.sql = res.candidates.front();
    } catch (const Error& e) {
      fail("generate", e);
    }
    out.trace.times.generate = since(t);
    if (!out.error_code.empty()) return finish();
  }

  {
    const auto t = Clock::now();
    out.verdict = checker_.check(out.sql);
    out.trace.times.check = since(t);
    out.trace.verdict = out.verdict->security;
  }
  const auto& v = *out.verdict;
  if (v.blocked()) {
    out.reason = "Blocked";
  } else if (!v.syntax.ok()) {
    out.reason = std::string(check::to_string(v.syntax.status));
  } else if (!v.syntax.statement->is<sql::Select>()) {
    out.reason = "NotExecutable";
  }
  if (!out.reason.empty()) {
    out.refused = true;
    out.trace.refusal = out.reason;
    return finish();
  }

  const auto t = Clock::now();
  try {
    out.rows = executor_.execute(v.syntax.statement->as<sql::Select>());
    out.trace.row_count = out.rows->rows.size();
  } catch (const Error& e) {
    fail("execute", e);
  }
  out.trace.times.execute = since(t);
  return finish();
}

void Gateway::audit(const QueryOutcome& outcome) {
  if (!audit_) return;
  nlohmann::json j{{"time_ms", std::chrono::duration_cast<std::chrono::milliseconds>(
                                   std::chrono::system_clock::now().time_since_epoch())
                                   .count()},
                   {"request_id", outcome.trace.request_id},
                   {"nl", outcome.nl},
                   {"sql", outcome.sql},
                   {"backend", outcome.trace.backend},
                   {"refused", outcome.refused},
                   {"trace", outcome.trace.to_json()}};
  if (outcome.verdict) {
    nlohmann::json rules = nlohmann::json::array();
    for (const auto& h : outcome.verdict->hits) rules.push_back(h.rule);
    j["verdict"] = outcome.verdict->blocked() ? "Block" : "Allow";
    j["rules"] = rules;
    j["score"] = outcome.verdict->score;
  }
  if (outcome.refused) j["reason"] = outcome.reason;
  if (!outcome.error_code.empty()) j["error"] = {{"code", outcome.error_code}, {"stage", outcome.error_stage}};
  std::lock_guard lock(audit_mutex_);
  *audit_ << j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace) << '\n';
  audit_->flush();
}

}  // namespace streamlink::gateway
