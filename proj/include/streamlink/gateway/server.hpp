#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <thread>

#include "streamlink/gateway/gateway.hpp"

namespace httplib {
class Server;
}

namespace streamlink::gateway {

// JSON API over HTTP:
//   POST /api/query    {"nl"} or {"sql"}  -> outcome with sql, verdict, rows|reason, trace
//   POST /api/generate {"nl"}             -> {"sql", "candidates", "backend", "elapsed_ms"}
//   POST /api/check    {"sql"}            -> verdict
//   GET  /api/schema, GET /api/nodes, GET /health
// Static files from `ui_dir` are served at "/" when given.
class HttpServer {
 public:
  explicit HttpServer(Gateway& gateway, std::optional<std::filesystem::path> ui_dir = std::nullopt);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  // Binds (port 0 picks a free one) and serves on a background thread.
  int start(const std::string& host, int port);
  // Binds and serves on the calling thread until stop().
  void run(const std::string& host, int port);
  void stop();

 private:
  void routes();

  Gateway& gateway_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
};

}  // namespace streamlink::gateway
