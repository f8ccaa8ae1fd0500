#include "streamlink/gateway/server.hpp"

#include <httplib.h>

#include <json.hpp>

#include <set>

namespace streamlink::gateway {

namespace {

using nlohmann::json;

int status_for(const std::string& code) {
  static const std::set<std::string, std::less<>> bad_request{
      "InvalidArgument", "InvalidJson",   "UnknownColumn", "UnknownTable",
      "TypeError",       "InvalidQuery",  "SyntaxError",   "UnsupportedFeature"};
  if (bad_request.contains(code)) return 400;
  if (code == "NoHealthyBackend" || code == "NoHealthyShard") return 503;
  if (code == "NoMatch" || code == "EmptyCompletion" || code == "ExemplarInvalid") return 422;
  if (code == "BackendUnreachable" || code == "BackendTimeout" || code == "BackendProtocol") return 502;
  return 500;
}

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(-1, ' ', false, json::error_handler_t::replace), "application/json");
}

void send_error(httplib::Response& res, const std::string& code, const std::string& message) {
  send_json(res, status_for(code), {{"error", {{"code", code}, {"message", message}}}});
}

// Reads a required string field from the request body.
std::optional<std::string> field(const httplib::Request& req, httplib::Response& res, const char* name) {
  json body;
  try {
    body = json::parse(req.body);
  } catch (const json::parse_error& e) {
    send_error(res, "InvalidJson", e.what());
    return std::nullopt;
  }
  if (!body.is_object() || !body.contains(name) || !body.at(name).is_string()) {
    send_error(res, "InvalidArgument", std::string("body needs a string \"") + name + "\"");
    return std::nullopt;
  }
  return body.at(name).get<std::string>();
}

json schema_json(const sql::Schema& schema, const storage::Database& db) {
  json tables = json::array();
  for (const auto& t : schema.tables()) {
    json cols = json::array();
    for (const auto& c : t.columns) cols.push_back({{"name", c.name}, {"type", sql::to_string(c.type)}});
    json entry{{"name", t.name}, {"columns", cols}};
    if (db.has_table(t.name)) entry["rows"] = db.table(t.name).row_count();
    tables.push_back(std::move(entry));
  }
  return {{"tables", tables}, {"shards", db.shard_count()}};
}

}  // namespace

HttpServer::HttpServer(Gateway& gateway, std::optional<std::filesystem::path> ui_dir)
    : gateway_(gateway), server_(std::make_unique<httplib::Server>()) {
  routes();
  if (ui_dir) server_->set_mount_point("/", ui_dir->string());
}

HttpServer::~HttpServer() { stop(); }

void HttpServer::routes() {
  auto& s = *server_;
  s.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    try {
      std::rethrow_exception(ep);
    } catch (const Error& e) {
      send_error(res, e.code(), e.what());
    } catch (const std::exception& e) {
      send_error(res, "Internal", e.what());
    }
  });

  s.Get("/health", [this](const httplib::Request&, httplib::Response& res) {
    send_json(res, 200, {{"status", "ok"}, {"requests", gateway_.requests()}});
  });

  s.Get("/api/schema", [this](const httplib::Request&, httplib::Response& res) {
    send_json(res, 200, schema_json(gateway_.database().schema(), gateway_.database()));
  });

  s.Get("/api/nodes", [this](const httplib::Request&, httplib::Response& res) {
    json nodes = json::array();
    for (const auto& n : gateway_.registry().snapshot()) nodes.push_back(n.to_json());
    send_json(res, 200, {{"nodes", nodes}, {"backend_mode", to_string(gateway_.mode())}});
  });

  s.Post("/api/query", [this](const httplib::Request& req, httplib::Response& res) {
    json body;
    try {
      body = json::parse(req.body);
    } catch (const json::parse_error& e) {
      send_error(res, "InvalidJson", e.what());
      return;
    }
    QueryRequest q;
    if (body.is_object()) {
      if (body.contains("nl") && body["nl"].is_string()) q.nl = body["nl"].get<std::string>();
      if (body.contains("sql") && body["sql"].is_string()) q.sql = body["sql"].get<std::string>();
    }
    auto outcome = gateway_.handle_query(q);
    send_json(res, outcome.error_code.empty() ? 200 : status_for(outcome.error_code), outcome.to_json());
  });

  s.Post("/api/generate", [this](const httplib::Request& req, httplib::Response& res) {
    auto nl = field(req, res, "nl");
    if (!nl) return;
    auto r = gateway_.generate(*nl);
    send_json(res, 200,
              {{"sql", r.candidates.empty() ? std::string() : r.candidates.front()},
               {"candidates", r.candidates},
               {"backend", r.backend},
               {"elapsed_ms", static_cast<double>(r.elapsed.count()) / 1000.0}});
  });

  s.Post("/api/check", [this](const httplib::Request& req, httplib::Response& res) {
    auto sql = field(req, res, "sql");
    if (!sql) return;
    send_json(res, 200, gateway_.check(*sql).to_json());
  });
}

int HttpServer::start(const std::string& host, int port) {
  int bound = port == 0 ? server_->bind_to_any_port(host) : (server_->bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw GatewayError("BindFailed", "cannot listen on " + host + ":" + std::to_string(port));
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return bound;
}

void HttpServer::run(const std::string& host, int port) {
  if (!server_->listen(host, port)) {
    throw GatewayError("BindFailed", "cannot listen on " + host + ":" + std::to_string(port));
  }
}

void HttpServer::stop() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace streamlink::gateway
