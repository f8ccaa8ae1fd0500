#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "streamlink/error.hpp"

namespace streamlink::augment {

// SlotMismatch, EmptyFieldValues, InvalidTemplate, UnparseableInstantiation,
// EmptyCorpus, InvalidArgument, IoError.
class AugmentError : public Error {
 public:
  using Error::Error;
};

enum class SlotType { Text, Int, Float };

using SlotValue = std::variant<std::int64_t, double, std::string>;
using Bindings = std::vector<std::pair<std::string, SlotValue>>;

// Slot values for each slot, in declaration order.
struct FieldInstances {
  std::vector<std::pair<std::string, std::vector<SlotValue>>> fields;

  SlotType type_of(std::string_view slot) const;
  std::size_t tuple_count() const;  // product of list sizes
};

// One SQL template with its paraphrases and field values. Slots are written
// {name} on both sides.
struct TemplateSet {
  std::string sql_template;
  std::vector<std::string> nl_templates;
  FieldInstances fields;

  // {"sql_template": ..., "nl_templates": [...], "fields": {"slot": [values]}}
  static TemplateSet from_json(const nlohmann::ordered_json& j);
};

// Files hold one template object, an array of them, or one per line.
std::vector<TemplateSet> load_templates(const std::filesystem::path& path);

struct Pair {
  std::string nl;
  std::string sql;
  std::string source;  // "domain" or "open"
  Bindings bindings;   // empty for open-corpus pairs
};

enum class ExpandMode {
  Cartesian,  // every paraphrase with every field tuple
  Aligned,    // one pair per field tuple; paraphrases taken in rotation
};

// Slot names in order of first appearance.
std::vector<std::string> slot_names(std::string_view text);

// Inserts values into the SQL side. Inside a quoted literal a text value has
// that quote doubled; outside quotes it becomes a single-quoted literal.
// Numbers print as SQL numerals.
std::string instantiate_sql(std::string_view sql_template, const Bindings& bindings);
// Inserts values raw, numbers printed as on the SQL side.
std::string instantiate_nl(std::string_view nl_template, const Bindings& bindings);

// Throws InvalidTemplate, SlotMismatch or EmptyFieldValues.
void validate(const TemplateSet& set);

std::size_t expected_count(const TemplateSet& set, ExpandMode mode);

// Validates, then emits pairs in a fixed order: field tuples in odometer
// order (last slot fastest); in cartesian mode each tuple is followed by all
// its paraphrases. Every SQL is parsed; failure is UnparseableInstantiation.
std::vector<Pair> expand(const TemplateSet& set, ExpandMode mode);
// Expands several sets (in parallel) and concatenates in input order.
std::vector<Pair> expand_all(const std::vector<TemplateSet>& sets, ExpandMode mode);

// Reads text-to-SQL corpora shaped like {"question", "query", "db_id"}:
// a JSON array or JSON-lines.
std::vector<Pair> load_open_corpus(const std::filesystem::path& path);

struct Ratio {
  std::uint64_t domain = 1;
  std::uint64_t open = 1;
  static Ratio parse(std::string_view text);  // "1:1", "2:1", "1:0"
};

struct DatasetMix {
  std::vector<Pair> pairs;
  std::size_t domain_count = 0;
  std::size_t open_count = 0;
};

// Takes as many pairs as the ratio allows from seeded shuffles of each
// corpus (open = floor(domain * b / a), shrinking the domain side when the
// open corpus is short), then shuffles the union. Same seed, same output.
// EmptyCorpus when a corpus the ratio draws from is empty.
DatasetMix mix(const std::vector<Pair>& domain, const std::vector<Pair>& open, Ratio ratio, std::uint64_t seed);

// One {"nl", "sql", "source"} object per line.
void write_jsonl(const std::vector<Pair>& pairs, std::ostream& out);

}  // namespace streamlink::augment
