#include "streamlink/gateway/shard_executor.hpp"

namespace streamlink::gateway {

storage::LocalResult LocalShardWorker::run(const storage::BoundQuery& query, const storage::ShardedTable& table,
                                           std::size_t shard) const {
  return table.read_shard(shard, [&](const std::vector<storage::Row>& rows) {
    return storage::execute_local(query, rows, true);
  });
}

std::string shard_node_id(std::size_t shard) { return "shard-" + std::to_string(shard); }

ShardExecutor::ShardExecutor(std::shared_ptr<const storage::Database> db, NodeRegistry& registry,
                             std::shared_ptr<const ShardWorker> worker, storage::DistributedOptions options)
    : db_(std::move(db)), registry_(registry), worker_(std::move(worker)), options_(options) {}

void ShardExecutor::register_nodes() {
  for (std::size_t i = 0; i < db_->shard_count(); ++i) {
    auto id = shard_node_id(i);
    if (!registry_.contains(id)) registry_.add({id, NodeRole::Shard, "local://shard/" + std::to_string(i)}, true);
  }
}

storage::ResultSet ShardExecutor::execute(const sql::Select& select) const {
  ++calls_;
  const auto& table = db_->table(select.table);
  storage::BoundQuery query(select, table.def());
  for (std::size_t i = 0; i < table.shard_count(); ++i) {
    auto id = shard_node_id(i);
    if (registry_.health(id) != Health::Healthy) {
      throw GatewayError("NoHealthyShard", "shard node '" + id + "' is unhealthy");
    }
  }
  return storage::scatter_gather(
      query, table.shard_count(), [&](std::size_t shard) { return worker_->run(query, table, shard); },
      options_.parallel);
}

}  // namespace streamlink::gateway
