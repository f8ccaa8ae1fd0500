#pragma once

#include <atomic>
#include <chrono>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <stop_token>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <json.hpp>

#include "streamlink/error.hpp"

namespace streamlink::gateway {

// NoHealthyBackend, NoHealthyShard, DuplicateNode, UnknownNode, InvalidConfig,
// plus stage failures re-raised with the stage name.
class GatewayError : public Error {
 public:
  using Error::Error;
};

enum class NodeRole { Generator, Classifier, Shard, Ui };
std::string_view to_string(NodeRole r);
NodeRole parse_role(std::string_view s);

enum class Health { Healthy, Unhealthy };

struct NodeSpec {
  std::string id;
  NodeRole role = NodeRole::Generator;
  std::string address;  // http://host:port/... or local://...
};

struct NodeState {
  NodeSpec spec;
  Health health = Health::Unhealthy;
  std::chrono::system_clock::time_point since{};  // of the current health
  unsigned consecutive_failures = 0;
  unsigned consecutive_successes = 0;
  bool ever_healthy = false;

  nlohmann::json to_json() const;
};

struct HealthPolicy {
  unsigned failures_to_unhealthy = 3;
  unsigned successes_to_healthy = 2;
};

// Node table plus per-role round-robin. A node turns Unhealthy after F
// consecutive failed probes and Healthy again after S consecutive
// successes; a node that has never been healthy needs only one.
class NodeRegistry {
 public:
  explicit NodeRegistry(HealthPolicy policy = {});

  void add(NodeSpec spec, bool healthy = false);  // DuplicateNode
  bool contains(std::string_view id) const;

  // Applies one probe outcome; returns the health afterwards.
  Health record_probe(std::string_view id, bool success);

  Health health(std::string_view id) const;  // UnknownNode
  std::vector<NodeState> snapshot() const;
  std::vector<std::string> healthy(NodeRole role) const;

  // Next healthy node of `role` in registration order, round-robin.
  // NoHealthyBackend (generator, classifier) or NoHealthyShard.
  std::string balance(NodeRole role);

  const HealthPolicy& policy() const { return policy_; }

 private:
  HealthPolicy policy_;
  mutable std::shared_mutex mutex_;
  std::vector<NodeState> nodes_;
  std::map<NodeRole, std::uint64_t> cursor_;
};

using ProbeFn = std::function<bool(const NodeSpec&)>;

// GET {address}/health within the timeout; local:// nodes always answer.
ProbeFn http_probe(std::chrono::milliseconds timeout);

// Probes every registered node on a fixed period from a background thread.
class HealthProber {
 public:
  HealthProber(NodeRegistry& registry, ProbeFn probe, std::chrono::milliseconds interval);
  ~HealthProber();
  HealthProber(const HealthProber&) = delete;
  HealthProber& operator=(const HealthProber&) = delete;

  void start();
  void stop();
  void probe_once();  // one synchronous sweep
  std::uint64_t sweeps() const { return sweeps_.load(); }

 private:
  NodeRegistry& registry_;
  ProbeFn probe_;
  std::chrono::milliseconds interval_;
  std::atomic<std::uint64_t> sweeps_{0};
  std::jthread thread_;
};

}  // namespace streamlink::gateway
