#pragma once

#include <string_view>

namespace streamlink::testkit {

// The analyst question used throughout the docs and its hand-written SQL.
inline constexpr std::string_view kIntelQuestion =
    "tell me the top 10 most frequently appeared CPC by the assignee of Intel after 2009";
inline constexpr std::string_view kIntelTopCpcSql =
    "SELECT cpc, COUNT(*) AS count FROM google_full WHERE assignee LIKE \"%Intel%\" AND grant_date >= \"2009\" "
    "GROUP BY cpc ORDER BY count DESC LIMIT 10";

}  // namespace streamlink::testkit
