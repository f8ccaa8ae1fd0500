#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "streamlink/storage/table.hpp"

namespace streamlink::storage {

// Per-shard snapshot file; layout documented in docs/formats.md.
//   "SLSNAP01" | u32 columns | u32 shard | u32 shard_count | u64 rows
//   rows: u32 byte length, then per field u8 tag (0 int, 1 float, 2 text)
//         and payload (i64 / f64 bits / u32 length + bytes). Little endian.
struct Snapshot {
  std::uint32_t column_count = 0;
  std::uint32_t shard = 0;
  std::uint32_t shard_count = 1;
  std::vector<Row> rows;
};

void write_snapshot(const ShardedTable& table, std::size_t shard, const std::filesystem::path& path);
Snapshot read_snapshot(const std::filesystem::path& path);

// Writes <dir>/<table>.shard<i>.snap for every shard.
void write_snapshots(const ShardedTable& table, const std::filesystem::path& dir);

// Restores every shard written by write_snapshots; returns the row count.
// The files must match the table's column and shard counts.
std::size_t load_snapshots(ShardedTable& table, const std::filesystem::path& dir);

}  // namespace streamlink::storage
