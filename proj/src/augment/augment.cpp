#include "streamlink/augment/augment.hpp"

#include <cctype>
#include <exception>
#include <fstream>
#include <limits>
#include <algorithm>
#include <ostream>
#include <set>
#include <sstream>

#include "streamlink/random.hpp"
#include "streamlink/sql/parser.hpp"
#include "streamlink/sql/printer.hpp"
#include "streamlink/strings.hpp"

namespace streamlink::augment {

namespace {

bool slot_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool slot_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

// Length of a "{name}" slot starting at text[i], or 0.
std::size_t slot_at(std::string_view text, std::size_t i) {
  if (text[i] != '{' || i + 2 >= text.size() || !slot_start(text[i + 1])) return 0;
  std::size_t j = i + 1;
  while (j < text.size() && slot_char(text[j])) ++j;
  return j < text.size() && text[j] == '}' ? j - i + 1 : 0;
}

const SlotValue* lookup(const Bindings& b, std::string_view name) {
  for (const auto& [k, v] : b) {
    if (k == name) return &v;
  }
  return nullptr;
}

std::string number_text(const SlotValue& v) {
  if (const auto* i = std::get_if<std::int64_t>(&v)) return sql::print(sql::Literal{*i});
  return sql::print(sql::Literal{std::get<double>(v)});
}

std::string plain_text(const SlotValue& v) {
  if (const auto* s = std::get_if<std::string>(&v)) return *s;
  return number_text(v);
}

std::string describe(const Bindings& b) {
  std::string out;
  for (const auto& [k, v] : b) {
    if (!out.empty()) out += ", ";
    out += k + "=" + plain_text(v);
  }
  return out;
}

template <class Fn>
std::string substitute(std::string_view text, const Bindings& bindings, Fn&& render) {
  std::string out;
  char quote = 0;
  for (std::size_t i = 0; i < text.size();) {
    char c = text[i];
    if (std::size_t len = slot_at(text, i)) {
      std::string_view name = text.substr(i + 1, len - 2);
      if (const SlotValue* v = lookup(bindings, name)) {
        out += render(*v, quote);
        i += len;
        continue;
      }
    }
    if (quote != 0) {
      if (c == quote) {
        if (i + 1 < text.size() && text[i + 1] == quote) {
          out += c;
          out += c;
          i += 2;
          continue;
        }
        quote = 0;
      }
    } else if (c == '\'' || c == '"' || c == '`') {
      quote = c;
    }
    out += c;
    ++i;
  }
  return out;
}

std::set<std::string> slot_set(std::string_view text) {
  auto names = slot_names(text);
  return {names.begin(), names.end()};
}

std::string join(const std::set<std::string>& names) {
  std::string out;
  for (const auto& n : names) out += (out.empty() ? "{" : ", {") + n + "}";
  return out.empty() ? "(none)" : out;
}

// Whole-file JSON, or JSON-lines when the file does not parse as one value.
std::vector<nlohmann::ordered_json> read_documents(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw AugmentError("IoError", "cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  std::vector<nlohmann::ordered_json> docs;
  try {
    auto doc = nlohmann::ordered_json::parse(text);
    if (doc.is_array()) {
      for (auto& d : doc) docs.push_back(std::move(d));
    } else {
      docs.push_back(std::move(doc));
    }
    return docs;
  } catch (const nlohmann::json::parse_error&) {
  }
  std::istringstream lines(text);
  std::string line;
  std::size_t n = 0;
  while (std::getline(lines, line)) {
    ++n;
    if (trim(line).empty()) continue;
    try {
      docs.push_back(nlohmann::ordered_json::parse(line));
    } catch (const nlohmann::json::exception& e) {
      throw AugmentError("InvalidTemplate", path.string() + " line " + std::to_string(n) + ": " + e.what());
    }
  }
  return docs;
}

}  // namespace

SlotType FieldInstances::type_of(std::string_view slot) const {
  for (const auto& [name, values] : fields) {
    if (name != slot || values.empty()) continue;
    if (std::holds_alternative<std::string>(values.front())) return SlotType::Text;
    if (std::holds_alternative<double>(values.front())) return SlotType::Float;
    return SlotType::Int;
  }
  return SlotType::Text;
}

std::size_t FieldInstances::tuple_count() const {
  std::size_t n = 1;
  for (const auto& [name, values] : fields) n *= values.size();
  return n;
}

TemplateSet TemplateSet::from_json(const nlohmann::ordered_json& j) {
  TemplateSet set;
  try {
    set.sql_template = j.at("sql_template").get<std::string>();
    set.nl_templates = j.at("nl_templates").get<std::vector<std::string>>();
    for (const auto& [slot, values] : j.at("fields").items()) {
      if (!values.is_array()) throw AugmentError("InvalidTemplate", "field '" + slot + "' must be a list");
      std::vector<SlotValue> list;
      bool any_text = false, any_number = false, any_float = false;
      for (const auto& v : values) {
        if (v.is_string()) {
          any_text = true;
          list.emplace_back(v.get<std::string>());
        } else if (v.is_number_integer()) {
          any_number = true;
          list.emplace_back(v.get<std::int64_t>());
        } else if (v.is_number()) {
          any_number = any_float = true;
          list.emplace_back(v.get<double>());
        } else {
          throw AugmentError("InvalidTemplate", "field '" + slot + "' values must be strings or numbers");
        }
      }
      if (any_text && any_number) {
        throw AugmentError("InvalidTemplate", "field '" + slot + "' mixes text and numbers");
      }
      if (any_float) {
        for (auto& v : list) {
          if (const auto* i = std::get_if<std::int64_t>(&v)) v = static_cast<double>(*i);
        }
      }
      set.fields.fields.emplace_back(slot, std::move(list));
    }
  } catch (const nlohmann::json::exception& e) {
    throw AugmentError("InvalidTemplate", std::string("bad template document: ") + e.what());
  }
  return set;
}

std::vector<TemplateSet> load_templates(const std::filesystem::path& path) {
  std::vector<TemplateSet> out;
  for (const auto& doc : read_documents(path)) out.push_back(TemplateSet::from_json(doc));
  return out;
}

std::vector<std::string> slot_names(std::string_view text) {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (std::size_t len = slot_at(text, i)) {
      std::string name(text.substr(i + 1, len - 2));
      if (std::find(names.begin(), names.end(), name) == names.end()) names.push_back(name);
      i += len - 1;
    }
  }
  return names;
}

std::string instantiate_sql(std::string_view sql_template, const Bindings& bindings) {
  return substitute(sql_template, bindings, [](const SlotValue& v, char quote) {
    const auto* s = std::get_if<std::string>(&v);
    if (s == nullptr) return number_text(v);
    if (quote != 0) {
      std::string out;
      for (char c : *s) {
        if (c == quote) out += c;
        out += c;
      }
      return out;
    }
    return sql::print(sql::Literal{sql::StringLit{*s, sql::QuoteStyle::Single}});
  });
}

std::string instantiate_nl(std::string_view nl_template, const Bindings& bindings) {
  std::string out;
  for (std::size_t i = 0; i < nl_template.size();) {
    if (std::size_t len = slot_at(nl_template, i)) {
      if (const SlotValue* v = lookup(bindings, nl_template.substr(i + 1, len - 2))) {
        out += plain_text(*v);
        i += len;
        continue;
      }
    }
    out += nl_template[i++];
  }
  return out;
}

void validate(const TemplateSet& set) {
  if (trim(set.sql_template).empty()) throw AugmentError("InvalidTemplate", "empty SQL template");
  if (set.nl_templates.empty()) throw AugmentError("InvalidTemplate", "no natural-language paraphrases");
  std::set<std::string> declared;
  for (const auto& [name, values] : set.fields.fields) {
    if (values.empty()) throw AugmentError("EmptyFieldValues", "slot {" + name + "} has no values");
    declared.insert(name);
  }
  auto used = slot_set(set.sql_template);
  if (used != declared) {
    throw AugmentError("SlotMismatch", "SQL template uses " + join(used) + " but fields declare " + join(declared));
  }
  for (std::size_t i = 0; i < set.nl_templates.size(); ++i) {
    auto nl = slot_set(set.nl_templates[i]);
    if (nl != declared) {
      throw AugmentError("SlotMismatch", "paraphrase " + std::to_string(i + 1) + " uses " + join(nl) +
                                             " but fields declare " + join(declared));
    }
  }
}

std::size_t expected_count(const TemplateSet& set, ExpandMode mode) {
  auto tuples = set.fields.tuple_count();
  return mode == ExpandMode::Cartesian ? tuples * set.nl_templates.size() : tuples;
}

std::vector<Pair> expand(const TemplateSet& set, ExpandMode mode) {
  validate(set);
  const auto& fields = set.fields.fields;
  const std::size_t tuples = set.fields.tuple_count();
  std::vector<Pair> out;
  out.reserve(expected_count(set, mode));
  std::vector<std::size_t> odometer(fields.size(), 0);
  for (std::size_t k = 0; k < tuples; ++k) {
    Bindings b;
    for (std::size_t f = 0; f < fields.size(); ++f) b.emplace_back(fields[f].first, fields[f].second[odometer[f]]);
    std::string sql = instantiate_sql(set.sql_template, b);
    try {
      sql::parse(sql);
    } catch (const Error& e) {
      throw AugmentError("UnparseableInstantiation", "tuple (" + describe(b) + ") gives unparseable SQL: " + e.what());
    }
    if (mode == ExpandMode::Cartesian) {
      for (const auto& nl : set.nl_templates) out.push_back({instantiate_nl(nl, b), sql, "domain", b});
    } else {
      out.push_back({instantiate_nl(set.nl_templates[k % set.nl_templates.size()], b), sql, "domain", b});
    }
    for (std::size_t f = fields.size(); f-- > 0;) {
      if (++odometer[f] < fields[f].second.size()) break;
      odometer[f] = 0;
    }
  }
  return out;
}

std::vector<Pair> expand_all(const std::vector<TemplateSet>& sets, ExpandMode mode) {
  std::vector<std::vector<Pair>> parts(sets.size());
  std::vector<std::exception_ptr> errors(sets.size());
  const auto n = static_cast<long>(sets.size());
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < n; ++i) {
    auto idx = static_cast<std::size_t>(i);
    try {
      parts[idx] = expand(sets[idx], mode);
    } catch (...) {
      errors[idx] = std::current_exception();
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  std::vector<Pair> out;
  for (auto& p : parts) std::move(p.begin(), p.end(), std::back_inserter(out));
  return out;
}

std::vector<Pair> load_open_corpus(const std::filesystem::path& path) {
  std::vector<Pair> out;
  for (const auto& doc : read_documents(path)) {
    try {
      out.push_back({doc.at("question").get<std::string>(), doc.at("query").get<std::string>(), "open", {}});
    } catch (const nlohmann::json::exception& e) {
      throw AugmentError("InvalidTemplate", path.string() + ": record " + std::to_string(out.size() + 1) +
                                                " lacks question/query: " + e.what());
    }
  }
  return out;
}

Ratio Ratio::parse(std::string_view text) {
  auto colon = text.find(':');
  Ratio r;
  try {
    if (colon == std::string_view::npos) throw std::invalid_argument("no colon");
    std::size_t used = 0;
    std::string a(trim(text.substr(0, colon))), b(trim(text.substr(colon + 1)));
    if (a.empty() || b.empty() || a[0] == '-' || b[0] == '-') throw std::invalid_argument("sign");
    r.domain = std::stoull(a, &used);
    if (used != a.size()) throw std::invalid_argument("trailing");
    r.open = std::stoull(b, &used);
    if (used != b.size()) throw std::invalid_argument("trailing");
  } catch (const std::exception&) {
    throw AugmentError("InvalidArgument", "ratio must look like A:B, got '" + std::string(text) + "'");
  }
  if (r.domain == 0 && r.open == 0) throw AugmentError("InvalidArgument", "ratio 0:0 selects nothing");
  return r;
}

DatasetMix mix(const std::vector<Pair>& domain, const std::vector<Pair>& open, Ratio ratio, std::uint64_t seed) {
  if (ratio.domain == 0 && ratio.open == 0) throw AugmentError("InvalidArgument", "ratio 0:0 selects nothing");
  if (ratio.domain > 0 && domain.empty()) throw AugmentError("EmptyCorpus", "domain corpus is empty");
  if (ratio.open > 0 && open.empty()) throw AugmentError("EmptyCorpus", "open corpus is empty");

  std::size_t nd = 0, no = 0;
  if (ratio.open == 0) {
    nd = domain.size();
  } else if (ratio.domain == 0) {
    no = open.size();
  } else {
    constexpr auto kMax = std::numeric_limits<std::uint64_t>::max();
    nd = domain.size();
    bool short_open = nd > kMax / ratio.open || nd * ratio.open / ratio.domain > open.size();
    if (short_open) {
      no = open.size();
      nd = no > kMax / ratio.domain ? domain.size() : std::min<std::size_t>(domain.size(), no * ratio.domain / ratio.open);
    } else {
      no = nd * ratio.open / ratio.domain;
    }
  }

  SeededRng rng(seed);
  auto take = [&](const std::vector<Pair>& src, std::size_t n, const char* source) {
    std::vector<Pair> copy = src;
    rng.shuffle(copy);
    copy.resize(n);
    for (auto& p : copy) p.source = source;
    return copy;
  };
  DatasetMix out;
  out.pairs = take(domain, nd, "domain");
  auto extra = take(open, no, "open");
  out.pairs.insert(out.pairs.end(), std::make_move_iterator(extra.begin()), std::make_move_iterator(extra.end()));
  rng.shuffle(out.pairs);
  out.domain_count = nd;
  out.open_count = no;
  return out;
}

void write_jsonl(const std::vector<Pair>& pairs, std::ostream& out) {
  for (const auto& p : pairs) {
    nlohmann::ordered_json j;
    j["nl"] = p.nl;
    j["sql"] = p.sql;
    j["source"] = p.source;
    out << j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace) << '\n';
  }
}

}  // namespace streamlink::augment
