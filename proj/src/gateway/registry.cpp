#include "streamlink/gateway/registry.hpp"

#include <algorithm>
#include <condition_variable>

#include "streamlink/net/completion.hpp"
#include "streamlink/strings.hpp"

namespace streamlink::gateway {

std::string_view to_string(NodeRole r) {
  switch (r) {
    case NodeRole::Generator: return "generator";
    case NodeRole::Classifier: return "classifier";
    case NodeRole::Shard: return "shard";
    case NodeRole::Ui: return "ui";
  }
  return "generator";
}

NodeRole parse_role(std::string_view s) {
  for (auto r : {NodeRole::Generator, NodeRole::Classifier, NodeRole::Shard, NodeRole::Ui}) {
    if (iequals(to_string(r), s)) return r;
  }
  throw GatewayError("InvalidConfig", "unknown node role '" + std::string(s) + "'");
}

nlohmann::json NodeState::to_json() const {
  auto since_ms = std::chrono::duration_cast<std::chrono::milliseconds>(since.time_since_epoch()).count();
  return {{"id", spec.id},
          {"role", std::string(to_string(spec.role))},
          {"address", spec.address},
          {"health", health == Health::Healthy ? "Healthy" : "Unhealthy"},
          {"since_ms", since_ms},
          {"consecutive_failures", consecutive_failures},
          {"consecutive_successes", consecutive_successes}};
}

NodeRegistry::NodeRegistry(HealthPolicy policy) : policy_(policy) {
  if (policy_.failures_to_unhealthy == 0 || policy_.successes_to_healthy == 0) {
    throw GatewayError("InvalidConfig", "health thresholds must be positive");
  }
}

void NodeRegistry::add(NodeSpec spec, bool healthy) {
  std::unique_lock lock(mutex_);
  for (const auto& n : nodes_) {
    if (n.spec.id == spec.id) throw GatewayError("DuplicateNode", "node id '" + spec.id + "' already registered");
  }
  NodeState state;
  state.spec = std::move(spec);
  state.health = healthy ? Health::Healthy : Health::Unhealthy;
  state.ever_healthy = healthy;
  state.since = std::chrono::system_clock::now();
  nodes_.push_back(std::move(state));
}

bool NodeRegistry::contains(std::string_view id) const {
  std::shared_lock lock(mutex_);
  return std::any_of(nodes_.begin(), nodes_.end(), [&](const NodeState& n) { return n.spec.id == id; });
}

Health NodeRegistry::record_probe(std::string_view id, bool success) {
  std::unique_lock lock(mutex_);
  auto it = std::find_if(nodes_.begin(), nodes_.end(), [&](const NodeState& n) { return n.spec.id == id; });
  if (it == nodes_.end()) throw GatewayError("UnknownNode", "no node '" + std::string(id) + "'");
  NodeState& n = *it;
  if (success) {
    ++n.consecutive_successes;
    n.consecutive_failures = 0;
    unsigned needed = n.ever_healthy ? policy_.successes_to_healthy : 1;
    if (n.health == Health::Unhealthy && n.consecutive_successes >= needed) {
      n.health = Health::Healthy;
      n.ever_healthy = true;
      n.since = std::chrono::system_clock::now();
    }
  } else {
    ++n.consecutive_failures;
    n.consecutive_successes = 0;
    if (n.health == Health::Healthy && n.consecutive_failures >= policy_.failures_to_unhealthy) {
      n.health = Health::Unhealthy;
      n.since = std::chrono::system_clock::now();
    }
  }
  return n.health;
}

Health NodeRegistry::health(std::string_view id) const {
  std::shared_lock lock(mutex_);
  for (const auto& n : nodes_) {
    if (n.spec.id == id) return n.health;
  }
  throw GatewayError("UnknownNode", "no node '" + std::string(id) + "'");
}

std::vector<NodeState> NodeRegistry::snapshot() const {
  std::shared_lock lock(mutex_);
  return nodes_;
}

std::vector<std::string> NodeRegistry::healthy(NodeRole role) const {
  std::shared_lock lock(mutex_);
  std::vector<std::string> out;
  for (const auto& n : nodes_) {
    if (n.spec.role == role && n.health == Health::Healthy) out.push_back(n.spec.id);
  }
  return out;
}

std::string NodeRegistry::balance(NodeRole role) {
  // Exclusive: the cursor advances under the same lock that reads health.
  std::unique_lock lock(mutex_);
  std::vector<const NodeState*> up;
  for (const auto& n : nodes_) {
    if (n.spec.role == role && n.health == Health::Healthy) up.push_back(&n);
  }
  if (up.empty()) {
    throw GatewayError(role == NodeRole::Shard ? "NoHealthyShard" : "NoHealthyBackend",
                       "no healthy " + std::string(to_string(role)) + " node");
  }
  auto& cursor = cursor_[role];
  return up[cursor++ % up.size()]->spec.id;
}

ProbeFn http_probe(std::chrono::milliseconds timeout) {
  return [timeout](const NodeSpec& node) {
    if (node.address.rfind("local://", 0) == 0) return true;
    try {
      return net::probe_http(net::Endpoint::parse(node.address), "/health", timeout);
    } catch (const Error&) {
      return false;
    }
  };
}

HealthProber::HealthProber(NodeRegistry& registry, ProbeFn probe, std::chrono::milliseconds interval)
    : registry_(registry), probe_(std::move(probe)), interval_(interval) {}

HealthProber::~HealthProber() { stop(); }

void HealthProber::start() {
  if (thread_.joinable()) return;
  thread_ = std::jthread([this](std::stop_token stop) {
    std::mutex m;
    std::condition_variable_any cv;
    while (!stop.stop_requested()) {
      probe_once();
      std::unique_lock lock(m);
      cv.wait_for(lock, stop, interval_, [] { return false; });
    }
  });
}

void HealthProber::stop() {
  if (thread_.joinable()) {
    thread_.request_stop();
    thread_.join();
  }
}

void HealthProber::probe_once() {
  for (const auto& node : registry_.snapshot()) {
    bool ok = false;
    try {
      ok = probe_(node.spec);
    } catch (...) {
      ok = false;
    }
    registry_.record_probe(node.spec.id, ok);
  }
  ++sweeps_;
}

}  // namespace streamlink::gateway
