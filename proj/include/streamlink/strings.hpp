#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace streamlink {

std::string to_lower(std::string_view s);
std::string to_upper(std::string_view s);
bool iequals(std::string_view a, std::string_view b);
std::string_view trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);
bool starts_with_icase(std::string_view s, std::string_view prefix);

// Case-insensitive search for a whole word (bounded by non-identifier chars).
bool contains_word_icase(std::string_view haystack, std::string_view word);

}  // namespace streamlink
