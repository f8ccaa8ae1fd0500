#pragma once

#include <atomic>
#include <cstddef>
#include <memory>
#include <vector>

#include "streamlink/gateway/registry.hpp"
#include "streamlink/sql/ast.hpp"
#include "streamlink/storage/executor.hpp"
#include "streamlink/storage/table.hpp"

namespace streamlink::gateway {

// One shard worker: runs the per-shard half of a query. Local workers read
// the in-process shard; the interface is what a networked worker would serve.
class ShardWorker {
 public:
  virtual ~ShardWorker() = default;
  virtual storage::LocalResult run(const storage::BoundQuery& query, const storage::ShardedTable& table,
                                   std::size_t shard) const = 0;
};

class LocalShardWorker : public ShardWorker {
 public:
  storage::LocalResult run(const storage::BoundQuery& query, const storage::ShardedTable& table,
                           std::size_t shard) const override;
};

// Node id of shard i: "shard-<i>".
std::string shard_node_id(std::size_t shard);

// Scatter-gather across shard nodes. Every shard must map to a healthy node;
// otherwise the query fails with NoHealthyShard before any shard runs.
class ShardExecutor {
 public:
  ShardExecutor(std::shared_ptr<const storage::Database> db, NodeRegistry& registry,
                std::shared_ptr<const ShardWorker> worker = std::make_shared<LocalShardWorker>(),
                storage::DistributedOptions options = {});

  // Registers shard-0..N-1 as healthy local nodes.
  void register_nodes();

  storage::ResultSet execute(const sql::Select& select) const;

  std::uint64_t calls() const { return calls_.load(); }
  const storage::Database& database() const { return *db_; }

 private:
  std::shared_ptr<const storage::Database> db_;
  NodeRegistry& registry_;
  std::shared_ptr<const ShardWorker> worker_;
  storage::DistributedOptions options_;
  mutable std::atomic<std::uint64_t> calls_{0};
};

}  // namespace streamlink::gateway
