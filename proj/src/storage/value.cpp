#include "streamlink/storage/value.hpp"

#include <array>
#include <charconv>

namespace streamlink::storage {

std::string to_text(const Value& v) {
  if (const auto* i = std::get_if<std::int64_t>(&v)) return std::to_string(*i);
  if (const auto* d = std::get_if<double>(&v)) {
    std::array<char, 64> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), *d);
    return std::string(buf.data(), ptr);
  }
  return std::get<std::string>(v);
}

std::string row_text(const Row& row) {
  std::string out;
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i) out.push_back('\t');
    out += to_text(row[i]);
  }
  return out;
}

bool is_numeric(const Value& v) { return !std::holds_alternative<std::string>(v); }

int compare(const Value& a, const Value& b) {
  if (is_numeric(a) != is_numeric(b)) {
    throw StorageError("TypeError", "cannot compare text with a number");
  }
  if (!is_numeric(a)) {
    int c = std::get<std::string>(a).compare(std::get<std::string>(b));
    return (c > 0) - (c < 0);
  }
  if (std::holds_alternative<std::int64_t>(a) && std::holds_alternative<std::int64_t>(b)) {
    auto x = std::get<std::int64_t>(a);
    auto y = std::get<std::int64_t>(b);
    return (x > y) - (x < y);
  }
  auto as_double = [](const Value& v) {
    if (const auto* i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
    return std::get<double>(v);
  };
  double x = as_double(a);
  double y = as_double(b);
  return (x > y) - (x < y);
}

Value from_literal(const sql::Literal& lit) {
  if (const auto* i = std::get_if<std::int64_t>(&lit)) return *i;
  if (const auto* d = std::get_if<double>(&lit)) return *d;
  return std::get<sql::StringLit>(lit).value;
}

bool like_match(std::string_view text, std::string_view pattern) {
  // Greedy two-pointer match with backtracking to the last '%'.
  std::size_t t = 0;
  std::size_t p = 0;
  std::size_t star = std::string_view::npos;
  std::size_t resume = 0;
  while (t < text.size()) {
    if (p < pattern.size() && (pattern[p] == '_' || pattern[p] == text[t])) {
      ++t;
      ++p;
    } else if (p < pattern.size() && pattern[p] == '%') {
      star = p++;
      resume = t;
    } else if (star != std::string_view::npos) {
      p = star + 1;
      t = ++resume;
    } else {
      return false;
    }
  }
  while (p < pattern.size() && pattern[p] == '%') ++p;
  return p == pattern.size();
}

}  // namespace streamlink::storage
