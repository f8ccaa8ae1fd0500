#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "streamlink/check/checker.hpp"
#include "streamlink/gateway/registry.hpp"
#include "streamlink/gateway/shard_executor.hpp"
#include "streamlink/gen/generator.hpp"
#include "streamlink/net/completion.hpp"
#include "streamlink/storage/executor.hpp"

namespace streamlink::gateway {

// template: rules only. template-first: template, then a model on NoMatch.
// remote: model only. remote-first: model, then the template on any failure.
enum class BackendMode { Template, TemplateFirst, Remote, RemoteFirst };
std::string_view to_string(BackendMode m);
BackendMode parse_backend_mode(std::string_view s);

struct RemoteNodeConfig {
  std::string id;
  std::string url;
  std::chrono::milliseconds timeout{30'000};
  nlohmann::json adapter = nlohmann::json::object();
};

struct DataSource {
  std::string table;
  std::filesystem::path file;
  std::string key;
};

// Paths are resolved against the config file's directory when loaded.
struct GatewayConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::filesystem::path schema;
  std::vector<DataSource> data;
  std::size_t shards = 3;
  std::optional<std::filesystem::path> policy;
  BackendMode backend_mode = BackendMode::Template;
  std::optional<std::filesystem::path> synonyms;
  std::optional<std::filesystem::path> exemplars;
  std::vector<RemoteNodeConfig> generators;
  std::vector<RemoteNodeConfig> classifiers;
  std::optional<std::filesystem::path> classifier_prompt;
  HealthPolicy health;
  std::chrono::milliseconds probe_interval{2000};
  std::chrono::milliseconds probe_timeout{2000};
  std::optional<std::filesystem::path> audit_log;
  std::optional<std::filesystem::path> ui_dir;

  static GatewayConfig from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
  static GatewayConfig load(const std::filesystem::path& path);

  // STREAMLINK_LISTEN=host:port, STREAMLINK_GENERATOR_URLS and
  // STREAMLINK_CLASSIFIER_URLS (comma-separated; replace the node lists),
  // STREAMLINK_BACKEND_MODE.
  void apply_env();
};

struct StageTimes {
  std::chrono::microseconds generate{0};
  std::chrono::microseconds check{0};
  std::chrono::microseconds execute{0};
  std::chrono::microseconds total{0};
};

struct PipelineTrace {
  std::string request_id;
  StageTimes times;
  std::string backend;  // node or backend id that produced the SQL
  std::optional<check::Security> verdict;
  std::optional<std::size_t> row_count;
  std::string refusal;  // machine-readable reason; empty when rows were returned

  nlohmann::json to_json() const;
};

struct QueryRequest {
  std::string nl;
  std::string sql;  // when set, generation is skipped
};

struct QueryOutcome {
  std::string nl;
  std::string sql;
  std::optional<check::CheckVerdict> verdict;
  std::optional<storage::ResultSet> rows;
  bool refused = false;
  std::string reason;         // Blocked, SyntaxError, Unsupported, NotExecutable
  std::string error_code;     // set when a stage failed
  std::string error_message;
  std::string error_stage;    // generate, check, execute
  PipelineTrace trace;

  bool ok() const { return rows.has_value(); }
  nlohmann::json to_json() const;
};

// Generator nodes come with their backend; classifier nodes with theirs.
template <class T>
struct NodeBinding {
  NodeSpec spec;
  std::shared_ptr<const T> impl;
  bool healthy = false;  // remote nodes wait for their first probe
};

struct GatewayParts {
  std::shared_ptr<const storage::Database> db;
  check::SecurityPolicy policy;
  BackendMode mode = BackendMode::Template;
  std::shared_ptr<const gen::Backend> template_backend;
  std::vector<NodeBinding<gen::Backend>> generators;
  std::vector<NodeBinding<check::Classifier>> classifiers;
  HealthPolicy health;
  std::shared_ptr<const ShardWorker> shard_worker = std::make_shared<LocalShardWorker>();
  std::optional<std::filesystem::path> audit_log;
};

// The request pipeline: NL -> generate -> check -> execute. Thread-safe.
class Gateway {
 public:
  explicit Gateway(GatewayParts parts);
  static std::unique_ptr<Gateway> from_config(const GatewayConfig& config);

  QueryOutcome handle_query(const QueryRequest& request);

  // Stage-level access. generate throws the backend's error.
  gen::GenerationResult generate(const std::string& nl);
  check::CheckVerdict check(const std::string& sql) const;

  NodeRegistry& registry() { return registry_; }
  const ShardExecutor& executor() const { return executor_; }
  const check::Checker& checker() const { return checker_; }
  const storage::Database& database() const { return *db_; }
  BackendMode mode() const { return mode_; }

  std::uint64_t requests() const { return request_counter_.load(); }

 private:
  gen::GenerationResult generate_remote(const gen::GenerationRequest& req);
  void audit(const QueryOutcome& outcome);

  std::shared_ptr<const storage::Database> db_;
  BackendMode mode_;
  NodeRegistry registry_;
  std::shared_ptr<const gen::Backend> template_backend_;
  std::map<std::string, std::shared_ptr<const gen::Backend>> generators_;
  std::map<std::string, std::shared_ptr<const check::Classifier>> classifiers_;
  check::Checker checker_;
  ShardExecutor executor_;
  std::atomic<std::uint64_t> request_counter_{0};
  std::mutex audit_mutex_;
  std::optional<std::ofstream> audit_;
};

}  // namespace streamlink::gateway
