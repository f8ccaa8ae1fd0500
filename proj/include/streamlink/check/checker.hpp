#pragma once

#include <chrono>
#include <filesystem>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "streamlink/error.hpp"
#include "streamlink/net/completion.hpp"
#include "streamlink/sql/ast.hpp"
#include "streamlink/sql/schema.hpp"

namespace streamlink::check {

// InvalidPolicy, ClassifierUnparseable.
class CheckError : public Error {
 public:
  using Error::Error;
};

enum class SyntaxStatus { Ok, SyntaxError, Unsupported };
std::string_view to_string(SyntaxStatus s);

struct SyntaxVerdict {
  SyntaxStatus status = SyntaxStatus::Ok;
  std::string detail;       // parser message when not Ok
  std::size_t offset = 0;   // byte offset of the failure
  std::optional<sql::Statement> statement;

  bool ok() const { return status == SyntaxStatus::Ok; }
};

// Never throws; every failure is encoded in the verdict.
SyntaxVerdict check_syntax(std::string_view sql);

// Rule ids R1..R7, plus "POLICY" for a statement class the policy forbids.
inline constexpr std::string_view kPolicyRule = "POLICY";
const std::vector<std::string>& rule_ids();
double rule_score(std::string_view rule);
std::string_view rule_name(std::string_view rule);

struct RuleHit {
  std::string rule;
  std::string fragment;  // source bytes [begin, end)
  std::size_t begin = 0;
  std::size_t end = 0;
  double score = 0;
};

struct SecurityPolicy {
  std::set<std::string> rules{rule_ids().begin(), rule_ids().end()};
  double threshold = 0.5;  // classifier score at or above this blocks
  std::set<sql::StatementClass> allow_classes{sql::StatementClass::Select};
  bool allow_writes = false;  // also admits INSERT, UPDATE and DELETE

  void validate() const;  // InvalidPolicy
  bool allows(sql::StatementClass c) const;

  // {"rules": ["R1", ...], "threshold": 0.5, "allow_classes": ["select"], "allow_writes": false}
  static SecurityPolicy from_json(const nlohmann::json& j);
  static SecurityPolicy load(const std::filesystem::path& path);
  nlohmann::json to_json() const;
};

enum class Security { Allow, Block };

struct CheckVerdict {
  SyntaxVerdict syntax;
  Security security = Security::Allow;
  std::vector<RuleHit> hits;
  double score = 0;
  bool classifier_used = false;
  std::optional<double> classifier_score;
  std::string classifier_error;  // why the classifier was skipped, if it was
  std::chrono::microseconds elapsed{0};

  bool blocked() const { return security == Security::Block; }
  nlohmann::json to_json() const;
};

// Rule engine over the raw text and, when it parsed, the statement. Rules
// not enabled in the policy are skipped; the class policy is applied too.
// `schema` feeds R4; without it only the system-table list counts.
std::vector<RuleHit> evaluate_rules(std::string_view sql, const SyntaxVerdict& syntax,
                                    const SecurityPolicy& policy, const sql::Schema* schema);

// Scores a statement as malicious in [0, 1].
class Classifier {
 public:
  virtual ~Classifier() = default;
  virtual double score(std::string_view sql) const = 0;
};

// Maps a model reply to a score: malicious/unsafe/yes -> 1, benign/safe/no
// -> 0, a numeral in [0, 1] as-is. Anything else is ClassifierUnparseable.
double parse_classifier_reply(std::string_view reply);

// Asks a served model through the completion protocol. The prompt template
// has one "{sql}" placeholder.
class RemoteClassifier : public Classifier {
 public:
  RemoteClassifier(net::CompletionClient client, std::string prompt_template = default_prompt());

  static std::string default_prompt();
  static std::string load_prompt(const std::filesystem::path& path);

  std::string prompt_for(std::string_view sql) const;
  double score(std::string_view sql) const override;

 private:
  net::CompletionClient client_;
  std::string prompt_;
};

class Checker {
 public:
  explicit Checker(SecurityPolicy policy = {}, const sql::Schema* schema = nullptr,
                   std::shared_ptr<const Classifier> classifier = nullptr);

  CheckVerdict check(std::string_view sql) const;

  // Verdicts in input order. The parallel path fans out with OpenMP.
  std::vector<CheckVerdict> check_batch(std::span<const std::string> statements, bool parallel = true) const;

  const SecurityPolicy& policy() const { return policy_; }
  bool has_classifier() const { return classifier_ != nullptr; }

 private:
  SecurityPolicy policy_;
  const sql::Schema* schema_;
  std::shared_ptr<const Classifier> classifier_;
};

}  // namespace streamlink::check
