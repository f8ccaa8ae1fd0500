#include "streamlink/storage/snapshot.hpp"

#include <bit>
#include <cstring>
#include <fstream>

namespace streamlink::storage {

namespace {

constexpr char kMagic[8] = {'S', 'L', 'S', 'N', 'A', 'P', '0', '1'};

template <class T>
void put(std::string& out, T v) {
  static_assert(std::is_integral_v<T>);
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<char>((static_cast<std::uint64_t>(v) >> (8 * i)) & 0xff));
  }
}

class Reader {
 public:
  explicit Reader(std::string data) : data_(std::move(data)) {}

  template <class T>
  T get() {
    need(sizeof(T));
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    }
    pos_ += sizeof(T);
    return static_cast<T>(v);
  }
  std::string bytes(std::size_t n) {
    need(n);
    std::string s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::size_t pos() const { return pos_; }
  bool done() const { return pos_ == data_.size(); }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > data_.size()) throw StorageError("SnapshotCorrupt", "snapshot truncated");
  }
  std::string data_;
  std::size_t pos_ = 0;
};

std::string encode_row(const Row& row) {
  std::string rec;
  for (const auto& v : row) {
    if (const auto* i = std::get_if<std::int64_t>(&v)) {
      rec.push_back(0);
      put<std::uint64_t>(rec, static_cast<std::uint64_t>(*i));
    } else if (const auto* d = std::get_if<double>(&v)) {
      rec.push_back(1);
      put<std::uint64_t>(rec, std::bit_cast<std::uint64_t>(*d));
    } else {
      const auto& s = std::get<std::string>(v);
      rec.push_back(2);
      put<std::uint32_t>(rec, static_cast<std::uint32_t>(s.size()));
      rec += s;
    }
  }
  return rec;
}

}  // namespace

void write_snapshot(const ShardedTable& table, std::size_t shard, const std::filesystem::path& path) {
  std::vector<Row> rows = table.shard_rows(shard);
  std::string out(kMagic, sizeof(kMagic));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(table.def().columns.size()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(shard));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(table.shard_count()));
  put<std::uint64_t>(out, rows.size());
  for (const auto& row : rows) {
    std::string rec = encode_row(row);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(rec.size()));
    out += rec;
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw StorageError("IoError", "cannot write " + path.string());
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
}

Snapshot read_snapshot(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw StorageError("IoError", "cannot open " + path.string());
  std::string data((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  Reader r(std::move(data));
  if (r.bytes(sizeof(kMagic)) != std::string(kMagic, sizeof(kMagic))) {
    throw StorageError("SnapshotCorrupt", "bad snapshot magic in " + path.string());
  }
  Snapshot snap;
  snap.column_count = r.get<std::uint32_t>();
  snap.shard = r.get<std::uint32_t>();
  snap.shard_count = r.get<std::uint32_t>();
  auto rows = r.get<std::uint64_t>();
  for (std::uint64_t i = 0; i < rows; ++i) {
    auto len = r.get<std::uint32_t>();
    std::size_t end = r.pos() + len;
    Row row;
    for (std::uint32_t c = 0; c < snap.column_count; ++c) {
      auto tag = r.get<std::uint8_t>();
      if (tag == 0) {
        row.emplace_back(static_cast<std::int64_t>(r.get<std::uint64_t>()));
      } else if (tag == 1) {
        row.emplace_back(std::bit_cast<double>(r.get<std::uint64_t>()));
      } else if (tag == 2) {
        row.emplace_back(r.bytes(r.get<std::uint32_t>()));
      } else {
        throw StorageError("SnapshotCorrupt", "unknown field tag " + std::to_string(tag));
      }
    }
    if (r.pos() != end) throw StorageError("SnapshotCorrupt", "record length mismatch at row " + std::to_string(i));
    snap.rows.push_back(std::move(row));
  }
  if (!r.done()) throw StorageError("SnapshotCorrupt", "trailing bytes in snapshot");
  return snap;
}

void write_snapshots(const ShardedTable& table, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (std::size_t s = 0; s < table.shard_count(); ++s) {
    write_snapshot(table, s, dir / (table.def().name + ".shard" + std::to_string(s) + ".snap"));
  }
}

std::size_t load_snapshots(ShardedTable& table, const std::filesystem::path& dir) {
  std::size_t total = 0;
  for (std::size_t s = 0; s < table.shard_count(); ++s) {
    auto path = dir / (table.def().name + ".shard" + std::to_string(s) + ".snap");
    Snapshot snap = read_snapshot(path);
    if (snap.column_count != table.def().columns.size() || snap.shard != s ||
        snap.shard_count != table.shard_count()) {
      throw StorageError("SnapshotCorrupt", path.string() + " does not match the table layout");
    }
    total += snap.rows.size();
    table.restore_shard(s, std::move(snap.rows));
  }
  return total;
}

}  // namespace streamlink::storage
