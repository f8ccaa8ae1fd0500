#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string_view>
#include <vector>

#include "streamlink/sql/schema.hpp"
#include "streamlink/storage/value.hpp"

namespace streamlink::storage::synthetic {

// Bundled demo corpus: table google_full(patent_id, assignee, cpc,
// grant_date, title). The distribution is fixed by quotas so query answers
// are known in advance (see docs/synthetic-data.md):
//
//   * Intel rows granted 2009-01-01..2023-12-28: cpc code j (j < 15) occurs
//     exactly kRecentBase - kRecentStep * j times.
//   * Intel rows granted 1995..2008: kOldIntelRows rows, cpc drawn
//     uniformly from codes 10..23.
//   * Everything else: non-Intel assignees, uniform cpc and dates.
//
// "Intel rows" have assignee "Intel Corporation" or "Intel IP Corporation";
// no other assignee contains the substring "Intel".

inline constexpr std::string_view kTableName = "google_full";
inline constexpr std::size_t kDefaultRows = 10000;
inline constexpr std::uint64_t kDefaultSeed = 20240521;

inline constexpr std::array<std::string_view, 24> kCpcCodes = {
    "G06F", "H01L", "H04L", "G06N", "H04W", "G06T", "G11C", "H03K", "G06Q", "H04N", "G01R", "H05K",
    "G02B", "B82Y", "G09G", "H01Q", "G05B", "G10L", "A61B", "B60W", "C12N", "F02D", "A61K", "B65G",
};

inline constexpr std::size_t kRecentCodes = 15;
inline constexpr std::int64_t kRecentBase = 150;
inline constexpr std::int64_t kRecentStep = 9;
inline constexpr std::size_t kOldIntelRows = 400;
inline constexpr std::size_t kOldIntelFirstCode = 10;

sql::TableDef table_def();
sql::Schema schema();

std::vector<Row> generate(std::uint64_t seed = kDefaultSeed, std::size_t rows = kDefaultRows);

void write_csv(const std::vector<Row>& rows, std::ostream& out);

}  // namespace streamlink::storage::synthetic
