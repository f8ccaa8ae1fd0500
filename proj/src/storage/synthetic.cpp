#include "streamlink/storage/synthetic.hpp"

#include <cstdio>
#include <ostream>

#include "streamlink/random.hpp"
#include "streamlink/storage/table.hpp"

namespace streamlink::storage::synthetic {

namespace {

const std::vector<std::string> kIntel = {"Intel Corporation", "Intel IP Corporation"};
const std::vector<std::string> kOthers = {
    "Advanced Micro Devices",  "Samsung Electronics",   "International Business Machines",
    "Qualcomm Incorporated",   "NVIDIA Corporation",    "Apple Inc.",
    "Micron Technology",       "Texas Instruments",     "Taiwan Semiconductor Manufacturing",
    "Huawei Technologies",     "Sony Group",            "Google LLC",
};
const std::vector<std::string> kAdjectives = {"Adaptive", "Low-power", "Scalable", "Secure",  "Distributed",
                                              "Hybrid",   "Compact",   "Parallel", "Dynamic", "Optical"};
const std::vector<std::string> kNouns = {"memory controller", "cache hierarchy", "signal processor", "transistor gate",
                                         "packet scheduler",  "neural accelerator", "display driver", "power regulator",
                                         "antenna array",     "interconnect fabric"};
const std::vector<std::string> kPurposes = {"data centers",   "mobile devices", "vehicles",     "edge inference",
                                            "storage arrays", "wireless links", "image sensors", "medical imaging"};

std::string date(SeededRng& rng, int first_year, int last_year) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", static_cast<int>(rng.between(first_year, last_year)),
                static_cast<int>(rng.between(1, 12)), static_cast<int>(rng.between(1, 28)));
  return buf;
}

std::string title(SeededRng& rng) {
  return rng.pick(kAdjectives) + " " + rng.pick(kNouns) + " for " + rng.pick(kPurposes);
}

}  // namespace

sql::TableDef table_def() {
  return {std::string(kTableName),
          {{"patent_id", sql::ColumnType::Text},
           {"assignee", sql::ColumnType::Text},
           {"cpc", sql::ColumnType::Text},
           {"grant_date", sql::ColumnType::Date},
           {"title", sql::ColumnType::Text}}};
}

sql::Schema schema() {
  sql::Schema s;
  s.add_table(table_def());
  return s;
}

std::vector<Row> generate(std::uint64_t seed, std::size_t rows) {
  std::size_t recent = 0;
  for (std::size_t j = 0; j < kRecentCodes; ++j) recent += static_cast<std::size_t>(kRecentBase - kRecentStep * static_cast<std::int64_t>(j));
  if (rows < recent + kOldIntelRows) {
    throw StorageError("InvalidArgument", "synthetic corpus needs at least " + std::to_string(recent + kOldIntelRows) + " rows");
  }
  SeededRng rng(seed);
  // Rows without patent_id yet: assignee, cpc, grant_date, title.
  std::vector<std::array<std::string, 4>> body;
  body.reserve(rows);
  for (std::size_t j = 0; j < kRecentCodes; ++j) {
    auto quota = kRecentBase - kRecentStep * static_cast<std::int64_t>(j);
    for (std::int64_t k = 0; k < quota; ++k) {
      body.push_back({rng.pick(kIntel), std::string(kCpcCodes[j]), date(rng, 2009, 2023), title(rng)});
    }
  }
  for (std::size_t k = 0; k < kOldIntelRows; ++k) {
    auto code = kOldIntelFirstCode + rng.below(kCpcCodes.size() - kOldIntelFirstCode);
    body.push_back({rng.pick(kIntel), std::string(kCpcCodes[code]), date(rng, 1995, 2008), title(rng)});
  }
  while (body.size() < rows) {
    body.push_back({rng.pick(kOthers), std::string(kCpcCodes[rng.below(kCpcCodes.size())]), date(rng, 1995, 2023),
                    title(rng)});
  }
  rng.shuffle(body);

  std::vector<Row> out;
  out.reserve(rows);
  for (std::size_t i = 0; i < body.size(); ++i) {
    out.push_back({"US" + std::to_string(8000000 + i), body[i][0], body[i][1], body[i][2], body[i][3]});
  }
  return out;
}

void write_csv(const std::vector<Row>& rows, std::ostream& out) {
  const auto def = table_def();
  for (std::size_t c = 0; c < def.columns.size(); ++c) out << (c ? "," : "") << def.columns[c].name;
  out << "\n";
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << csv_escape(to_text(row[c]));
    out << "\n";
  }
}

}  // namespace streamlink::storage::synthetic
