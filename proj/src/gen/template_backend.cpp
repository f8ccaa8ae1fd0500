#include "streamlink/gen/template_backend.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <chrono>
#include <fstream>
#include <optional>
#include <set>

#include "streamlink/sql/parser.hpp"
#include "streamlink/sql/printer.hpp"
#include "streamlink/strings.hpp"

namespace streamlink::gen {

namespace {

struct Word {
  std::string text;   // as typed, punctuation stripped
  std::string lower;
  bool quoted = false;
};

std::vector<Word> split_words(std::string_view nl) {
  std::vector<Word> words;
  std::size_t i = 0;
  while (i < nl.size()) {
    char c = nl[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (c == '"' || c == '\'') {
      auto close = nl.find(c, i + 1);
      if (close != std::string_view::npos && close > i + 1) {
        std::string inner(nl.substr(i + 1, close - i - 1));
        words.push_back({inner, to_lower(inner), true});
        i = close + 1;
        continue;
      }
    }
    std::size_t j = i;
    while (j < nl.size() && !std::isspace(static_cast<unsigned char>(nl[j]))) ++j;
    std::string w(nl.substr(i, j - i));
    const std::string_view strip = ",.?!;:()";
    while (!w.empty() && strip.find(w.back()) != std::string_view::npos) w.pop_back();
    while (!w.empty() && strip.find(w.front()) != std::string_view::npos) w.erase(w.begin());
    if (!w.empty()) words.push_back({w, to_lower(w), false});
    i = j;
  }
  return words;
}

const std::set<std::string, std::less<>> kStopWords = {
    "after", "since",  "before", "in",     "during", "on",      "and",     "or",       "with",   "by",
    "from",  "for",    "per",    "each",   "that",   "which",   "where",   "whose",    "the",    "a",
    "an",    "of",     "is",     "are",    "was",    "were",    "to",      "top",      "most",   "least",
    "order", "sorted", "limit",  "than",   "over",   "under",   "between", "granted",  "codes",  "code",
    "numbers", "classes", "ids", "values", "entries", "records", "results", "rows",     "me",     "all",
    "there", "have",   "has",    "been",   "do",     "does",    "many",    "much",     "first",  "latest"};

const std::set<std::string, std::less<>> kConnectors = {"of", "is", "=", "equals", "named", "called", "like",
                                                         "containing", "contains", ":"};

const std::set<std::string, std::less<>> kSelectVerbs = {"show", "list", "find", "get", "give", "display",
                                                          "return", "select", "fetch", "which", "what"};

bool is_number(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
}

// YYYY, YYYY-MM or YYYY-MM-DD.
bool is_date(std::string_view s) {
  if (s.size() != 4 && s.size() != 7 && s.size() != 10) return false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    bool dash = i == 4 || i == 7;
    if (dash ? s[i] != '-' : !std::isdigit(static_cast<unsigned char>(s[i]))) return false;
  }
  return true;
}

MatchMode parse_mode(const std::string& s) {
  auto m = to_lower(s);
  if (m == "contains") return MatchMode::Contains;
  if (m == "equals") return MatchMode::Equals;
  if (m == "date") return MatchMode::Date;
  throw GenerateError("ConfigInvalid", "unknown match mode '" + s + "'");
}

struct Mention {
  std::size_t column;  // index into SynonymMap::columns
  std::size_t begin;
  std::size_t end;
  bool filter = false;
};

struct Filter {
  std::size_t column;
  sql::Expr expr;
};

class Translator {
 public:
  Translator(const SynonymMap& map, const sql::TableDef& table, std::string_view nl)
      : map_(map), table_(table), words_(split_words(nl)), used_(words_.size(), false) {}

  sql::Select run() {
    for (std::size_t c = 0; c < map_.columns.size(); ++c) {
      if (!map_.entity_column.empty() && iequals(map_.columns[c].column, map_.entity_column)) entity_ = c;
    }
    find_mentions();
    value_filters();
    entity_filters();
    date_filters();
    return build();
  }

 private:
  // Longest synonym phrase starting at word i; returns its length in words.
  std::size_t match_phrase(std::size_t i, const std::string& phrase) const {
    auto parts = split(phrase, ' ');
    std::size_t n = 0;
    for (const auto& p : parts) {
      if (p.empty()) continue;
      if (i + n >= words_.size() || words_[i + n].quoted || words_[i + n].lower != p) return 0;
      ++n;
    }
    return n;
  }

  void find_mentions() {
    for (std::size_t i = 0; i < words_.size();) {
      std::size_t best_len = 0;
      std::size_t best_col = 0;
      bool table_hit = false;
      for (std::size_t c = 0; c < map_.columns.size(); ++c) {
        for (const auto& syn : map_.columns[c].synonyms) {
          auto len = match_phrase(i, syn);
          if (len > best_len) {
            best_len = len;
            best_col = c;
            table_hit = false;
          }
        }
      }
      for (const auto& syn : map_.table_synonyms) {
        auto len = match_phrase(i, syn);
        if (len > best_len) {
          best_len = len;
          table_hit = true;
        }
      }
      if (best_len == 0) {
        ++i;
        continue;
      }
      if (table_hit) {
        table_mentions_.push_back(i);
      } else {
        mentions_.push_back({best_col, i, i + best_len});
      }
      for (std::size_t k = i; k < i + best_len; ++k) used_[k] = true;
      i += best_len;
    }
  }

  bool mention_starts_at(std::size_t i) const {
    return std::any_of(mentions_.begin(), mentions_.end(), [&](const Mention& m) { return m.begin == i; }) ||
           std::find(table_mentions_.begin(), table_mentions_.end(), i) != table_mentions_.end();
  }

  bool value_word(std::size_t i) const {
    if (i >= words_.size() || used_[i]) return false;
    if (words_[i].quoted) return true;
    return kStopWords.count(words_[i].lower) == 0 && !is_date(words_[i].text) && !mention_starts_at(i);
  }

  // Consumes a value starting at i: one quoted word, or a run of plain words.
  std::optional<std::string> take_value(std::size_t i) {
    if (i >= words_.size() || !value_word(i)) return std::nullopt;
    if (words_[i].quoted) {
      used_[i] = true;
      return words_[i].text;
    }
    std::string value;
    while (i < words_.size() && !words_[i].quoted && value_word(i)) {
      if (!value.empty()) value += " ";
      value += words_[i].text;
      used_[i] = true;
      ++i;
    }
    return value;
  }

  std::optional<sql::Literal> typed_literal(const sql::Column& col, const std::string& v) const {
    if (col.type == sql::ColumnType::Int) {
      std::int64_t n = 0;
      auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), n);
      if (ec != std::errc() || p != v.data() + v.size()) return std::nullopt;
      return n;
    }
    if (col.type == sql::ColumnType::Float) {
      char* end = nullptr;
      double d = std::strtod(v.c_str(), &end);
      if (v.empty() || end != v.c_str() + v.size()) return std::nullopt;
      return d;
    }
    return sql::StringLit{v, sql::QuoteStyle::Single};
  }

  std::optional<sql::Expr> predicate(std::size_t c, const std::string& value) const {
    const auto& syn = map_.columns[c];
    const sql::Column* col = table_.find_column(syn.column);
    if (syn.match == MatchMode::Contains && col->type != sql::ColumnType::Int && col->type != sql::ColumnType::Float) {
      return sql::Expr{sql::Like{sql::ColumnRef{col->name}, sql::StringLit{"%" + value + "%", sql::QuoteStyle::Single}, false, {}}};
    }
    auto lit = typed_literal(*col, value);
    if (!lit) return std::nullopt;
    return sql::Expr{sql::Compare{sql::CompareOp::Eq, sql::ColumnRef{col->name}, *lit, {}}};
  }

  void value_filters() {
    for (auto& m : mentions_) {
      if (map_.columns[m.column].match == MatchMode::Date) continue;
      std::size_t j = m.end;
      if (j < words_.size() && !words_[j].quoted && kConnectors.count(words_[j].lower)) {
        used_[j] = true;
        ++j;
      }
      const std::size_t value_begin = j;
      auto value = take_value(j);
      if (!value) {
        if (j > m.end) used_[j - 1] = false;
        continue;
      }
      // "classification of Intel patents": the value names the table's
      // entity, not this column.
      std::size_t after = value_begin;
      while (after < words_.size() && used_[after] && !mention_starts_at(after)) ++after;
      bool before_table = std::find(table_mentions_.begin(), table_mentions_.end(), after) != table_mentions_.end();
      if (before_table && entity_ && *entity_ != m.column) {
        if (j > m.end) used_[m.end] = true;
        if (auto expr = predicate(*entity_, *value)) filters_.push_back({*entity_, std::move(*expr)});
        continue;
      }
      auto expr = predicate(m.column, *value);
      if (!expr) continue;
      m.filter = true;
      filters_.push_back({m.column, std::move(*expr)});
    }
  }

  void entity_filters() {
    if (!entity_) return;
    const auto entity = entity_;
    for (std::size_t i = 0; i + 1 < words_.size(); ++i) {
      if (used_[i]) continue;
      const auto& w = words_[i].lower;
      if (w != "by" && w != "from" && w != "for") continue;
      std::size_t j = i + 1;
      const Word& next = words_[j];
      bool named = next.quoted || (!next.text.empty() && std::isupper(static_cast<unsigned char>(next.text[0])));
      if (!named) continue;
      auto value = take_value(j);
      if (!value) continue;
      used_[i] = true;
      if (auto expr = predicate(*entity, *value)) filters_.push_back({*entity, std::move(*expr)});
    }
  }

  void date_filters() {
    std::optional<std::size_t> date_col;
    for (std::size_t c = 0; c < map_.columns.size() && !date_col; ++c) {
      if (map_.columns[c].match == MatchMode::Date) date_col = c;
    }
    if (!date_col) return;
    const std::string& name = table_.find_column(map_.columns[*date_col].column)->name;
    for (std::size_t i = 0; i + 1 < words_.size(); ++i) {
      const auto& w = words_[i].lower;
      const auto& d = words_[i + 1].text;
      if (used_[i + 1] || !is_date(d)) continue;
      sql::StringLit lit{d, sql::QuoteStyle::Single};
      std::optional<sql::Expr> expr;
      if (w == "after" || w == "since" || w == "from") {
        expr = sql::Expr{sql::Compare{sql::CompareOp::Ge, sql::ColumnRef{name}, lit, {}}};
      } else if (w == "before") {
        expr = sql::Expr{sql::Compare{sql::CompareOp::Lt, sql::ColumnRef{name}, lit, {}}};
      } else if (w == "in" || w == "during") {
        expr = sql::Expr{sql::Like{sql::ColumnRef{name}, sql::StringLit{d + "%", sql::QuoteStyle::Single}, false, {}}};
      } else if (w == "on") {
        expr = sql::Expr{sql::Compare{sql::CompareOp::Eq, sql::ColumnRef{name}, lit, {}}};
      }
      if (!expr) continue;
      used_[i] = used_[i + 1] = true;
      filters_.push_back({*date_col, std::move(*expr)});
    }
  }

  bool has_word(std::string_view w) const {
    return std::any_of(words_.begin(), words_.end(), [&](const Word& x) { return !x.quoted && x.lower == w; });
  }
  bool has_phrase(std::string_view a, std::string_view b) const {
    for (std::size_t i = 0; i + 1 < words_.size(); ++i) {
      if (words_[i].lower == a && words_[i + 1].lower == b) return true;
    }
    return false;
  }

  // N in "top N" / "first N" / "N <table>".
  std::optional<std::int64_t> number_after(std::string_view lead) const {
    for (std::size_t i = 0; i + 1 < words_.size(); ++i) {
      if (words_[i].lower == lead && is_number(words_[i + 1].text) && words_[i + 1].text.size() <= 9) {
        return std::stoll(words_[i + 1].text);
      }
    }
    return std::nullopt;
  }
  std::optional<std::int64_t> count_before_table() const {
    for (auto t : table_mentions_) {
      if (t > 0 && is_number(words_[t - 1].text) && words_[t - 1].text.size() <= 9 && !is_date(words_[t - 1].text)) {
        return std::stoll(words_[t - 1].text);
      }
    }
    return std::nullopt;
  }

  const Mention* rank_column() const {
    for (const auto& m : mentions_) {
      if (!m.filter) return &m;
    }
    return nullptr;
  }
  const Mention* group_column() const {
    for (const auto& m : mentions_) {
      if (m.filter || m.begin == 0) continue;
      const auto& prev = words_[m.begin - 1].lower;
      bool each = prev == "each" && m.begin >= 2 && words_[m.begin - 2].lower == "for";
      if (prev == "by" || prev == "per" || each) return &m;
    }
    return nullptr;
  }

  sql::Select base() const {
    sql::Select s;
    s.table = table_.name;
    if (filters_.size() == 1) {
      s.where = filters_.front().expr;
    } else if (filters_.size() > 1) {
      sql::Logical conj{sql::LogicalOp::And, {}};
      for (const auto& f : filters_) conj.operands.push_back(f.expr);
      s.where = sql::Expr{std::move(conj)};
    }
    return s;
  }

  sql::Select grouped(const Mention& m, std::optional<std::int64_t> limit) const {
    sql::Select s = base();
    const std::string& col = table_.find_column(map_.columns[m.column].column)->name;
    s.items = {sql::ColumnItem{col, std::nullopt}, sql::CountStarItem{std::string("count")}};
    s.group_by = {col};
    s.order_by = {{"count", true}};
    s.limit = limit;
    return s;
  }

  sql::Select build() const {
    const bool first_is_count = !words_.empty() && words_[0].lower == "count";
    const bool count_intent = first_is_count || has_phrase("how", "many") || has_phrase("number", "of");
    const auto top_n = number_after("top");
    const bool top_intent = top_n.has_value() || has_phrase("most", "frequent") || has_phrase("most", "frequently") ||
                            has_phrase("most", "common") || has_phrase("most", "popular");

    if (top_intent && !count_intent) {
      if (const Mention* m = rank_column()) return grouped(*m, top_n.value_or(10));
    }
    if (count_intent) {
      if (const Mention* m = group_column()) return grouped(*m, std::nullopt);
      sql::Select s = base();
      s.items = {sql::CountStarItem{}};
      return s;
    }
    const bool select_intent = !words_.empty() && kSelectVerbs.count(words_[0].lower) != 0;
    if ((select_intent || top_intent) && (!table_mentions_.empty() || !filters_.empty())) {
      sql::Select s = base();
      s.items = {sql::StarItem{}};
      if (auto n = number_after("first")) {
        s.limit = *n;
      } else if (top_n) {
        s.limit = *top_n;
      } else if (auto k = count_before_table()) {
        s.limit = *k;
      }
      return s;
    }
    throw GenerateError("NoMatch", "no intent pattern matched the request");
  }

  const SynonymMap& map_;
  const sql::TableDef& table_;
  std::vector<Word> words_;
  std::vector<bool> used_;
  std::vector<Mention> mentions_;
  std::vector<std::size_t> table_mentions_;
  std::vector<Filter> filters_;
  std::optional<std::size_t> entity_;
};

}  // namespace

SynonymMap SynonymMap::from_json(const nlohmann::json& j) {
  SynonymMap m;
  try {
    m.table = j.at("table").get<std::string>();
    for (const auto& s : j.value("table_synonyms", std::vector<std::string>{})) m.table_synonyms.push_back(to_lower(s));
    m.entity_column = j.value("entity_column", std::string());
    for (const auto& [name, spec] : j.at("columns").items()) {
      ColumnSynonyms c;
      c.column = name;
      for (const auto& s : spec.value("synonyms", std::vector<std::string>{name})) c.synonyms.push_back(to_lower(s));
      c.match = parse_mode(spec.value("match", std::string("equals")));
      m.columns.push_back(std::move(c));
    }
  } catch (const nlohmann::json::exception& e) {
    throw GenerateError("ConfigInvalid", std::string("bad synonym map: ") + e.what());
  }
  return m;
}

SynonymMap SynonymMap::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw GenerateError("IoError", "cannot open synonym file " + path.string());
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw GenerateError("ConfigInvalid", "bad synonym file " + path.string() + ": " + e.what());
  }
}

SynonymMap SynonymMap::defaults_for(const sql::TableDef& table) {
  SynonymMap m;
  m.table = table.name;
  m.table_synonyms = {to_lower(table.name)};
  for (const auto& col : table.columns) {
    ColumnSynonyms c;
    c.column = col.name;
    std::string spaced = to_lower(col.name);
    std::replace(spaced.begin(), spaced.end(), '_', ' ');
    c.synonyms = {to_lower(col.name)};
    if (spaced != c.synonyms.front()) c.synonyms.push_back(spaced);
    c.match = col.type == sql::ColumnType::Date ? MatchMode::Date
              : col.type == sql::ColumnType::Text ? MatchMode::Contains
                                                  : MatchMode::Equals;
    m.columns.push_back(std::move(c));
  }
  return m;
}

TemplateBackend::TemplateBackend(SynonymMap map, std::string id) : map_(std::move(map)), id_(std::move(id)) {}

sql::Select TemplateBackend::translate(std::string_view nl, const sql::Schema& schema) const {
  const sql::TableDef* table = schema.find_table(map_.table);
  if (table == nullptr) throw GenerateError("ConfigInvalid", "synonym map names unknown table '" + map_.table + "'");
  for (const auto& c : map_.columns) {
    if (table->find_column(c.column) == nullptr) {
      throw GenerateError("ConfigInvalid", "synonym map names unknown column '" + c.column + "'");
    }
  }
  return Translator(map_, *table, nl).run();
}

GenerationResult TemplateBackend::generate(const GenerationRequest& request) const {
  request.validate();
  const auto start = std::chrono::steady_clock::now();
  sql::Select select = translate(request.nl_query, *request.schema);
  GenerationResult result;
  result.backend = id_;
  result.candidates.push_back(sql::print(sql::Statement{std::move(select)}));
  result.elapsed = std::chrono::duration_cast<std::chrono::microseconds>(std::chrono::steady_clock::now() - start);
  return result;
}

}  // namespace streamlink::gen
