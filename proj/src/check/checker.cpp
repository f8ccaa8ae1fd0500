#include "streamlink/check/checker.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <sstream>

#include "streamlink/overloaded.hpp"
#include "streamlink/sql/lexer.hpp"
#include "streamlink/sql/parser.hpp"
#include "streamlink/sql/printer.hpp"
#include "streamlink/strings.hpp"

namespace streamlink::check {

namespace {

using sql::Token;
using sql::TokenKind;

// Byte range and token range of one semicolon-separated statement.
struct Segment {
  std::size_t first = 0;  // token indices [first, last)
  std::size_t last = 0;
  std::size_t begin = 0;
  std::size_t end = 0;
};

std::vector<Segment> segments_of(const std::vector<Token>& tokens) {
  std::vector<Segment> out;
  Segment cur;
  bool any = false;
  auto flush = [&](std::size_t stop) {
    cur.last = stop;
    if (any) out.push_back(cur);
    any = false;
  };
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const Token& t = tokens[i];
    if (t.kind == TokenKind::Semicolon) {
      flush(i);
      continue;
    }
    if (t.kind == TokenKind::Comment) continue;
    if (!any) {
      cur = {};
      cur.first = i;
      cur.begin = t.offset;
      any = true;
    }
    cur.end = t.end();
  }
  flush(tokens.size());
  return out;
}

RuleHit make_hit(std::string_view rule, std::string_view sql, std::size_t begin, std::size_t end) {
  end = std::min(end, sql.size());
  begin = std::min(begin, end);
  return {std::string(rule), std::string(sql.substr(begin, end - begin)), begin, end, rule_score(rule)};
}

std::string operand_key(const sql::Operand& o) {
  return std::visit(Overloaded{
                        [](const sql::ColumnRef& c) { return "c:" + to_lower(c.name); },
                        [](const sql::Literal& l) {
                          return std::visit(Overloaded{
                                                [](std::int64_t v) { return "n:" + std::to_string(v); },
                                                [](double v) {
                                                  if (std::nearbyint(v) == v && std::fabs(v) < 9e15) {
                                                    return "n:" + std::to_string(static_cast<std::int64_t>(v));
                                                  }
                                                  return "d:" + sql::print(sql::Literal{v});
                                                },
                                                [](const sql::StringLit& s) { return "s:" + s.value; },
                                            },
                                            l);
                        },
                    },
                    o);
}

void find_tautologies(const sql::Expr& e, bool under_or, std::vector<const sql::Compare*>& out) {
  std::visit(Overloaded{
                 [&](const sql::Compare& c) {
                   bool reflexive = c.op == sql::CompareOp::Eq || c.op == sql::CompareOp::Le || c.op == sql::CompareOp::Ge;
                   if (under_or && reflexive && operand_key(c.lhs) == operand_key(c.rhs)) out.push_back(&c);
                 },
                 [&](const sql::Logical& l) {
                   for (const auto& op : l.operands) find_tautologies(op, under_or || l.op == sql::LogicalOp::Or, out);
                 },
                 [](const auto&) {},
             },
             e.node);
}

void where_clauses(const sql::Statement& stmt, std::vector<const sql::Expr*>& out) {
  auto add = [&](const std::optional<sql::Expr>& w) {
    if (w) out.push_back(&*w);
  };
  std::visit(Overloaded{
                 [&](const sql::Select& s) { add(s.where); },
                 [&](const sql::Union& u) {
                   for (const auto& s : u.selects) add(s.where);
                 },
                 [&](const sql::Update& u) { add(u.where); },
                 [&](const sql::Delete& d) { add(d.where); },
                 [&](const sql::Stacked& s) {
                   for (const auto& inner : s.statements) where_clauses(inner, out);
                 },
                 [](const auto&) {},
             },
             stmt.node);
}

bool is_system_table(std::string_view table) {
  std::string t = to_lower(table);
  for (std::string_view exact : {"sqlite_master", "sqlite_schema", "sqlite_temp_master", "sysobjects", "syscolumns",
                                 "sysusers", "sysdatabases", "all_tables", "all_users", "user_tables", "dba_users",
                                 "tables", "columns", "schemata", "user"}) {
    if (t == exact) return true;
  }
  for (std::string_view prefix : {"information_schema.", "pg_", "mysql.", "sys.", "performance_schema.", "master.",
                                  "sqlite_"}) {
    if (t.rfind(prefix, 0) == 0) return true;
  }
  return false;
}

bool is_write(sql::StatementClass c) { return c != sql::StatementClass::Select; }

std::size_t matching_paren(const std::vector<Token>& tokens, std::size_t open, std::size_t stop) {
  int depth = 0;
  for (std::size_t i = open; i < stop; ++i) {
    if (tokens[i].kind == TokenKind::LParen) ++depth;
    if (tokens[i].kind == TokenKind::RParen && --depth == 0) return i;
  }
  return stop - 1;
}

bool is_hex(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return std::isxdigit(static_cast<unsigned char>(c)); });
}

bool obfuscating_call(const Token& t) {
  if (t.kind != TokenKind::Identifier && t.kind != TokenKind::Keyword) return false;
  std::string name = to_lower(t.value.empty() ? t.text : t.value);
  for (std::string_view f : {"char", "chr", "nchar", "sleep", "pg_sleep", "benchmark", "waitfor", "unhex", "randomblob"}) {
    if (name == f) return true;
  }
  return false;
}

struct RuleContext {
  std::string_view sql;
  const std::vector<Token>& tokens;
  const std::vector<Segment>& segments;
  const SyntaxVerdict& syntax;
  const SecurityPolicy& policy;
  const sql::Schema* schema;
  std::vector<RuleHit>& hits;

  bool on(std::string_view rule) const { return policy.rules.count(std::string(rule)) > 0; }
  void hit(std::string_view rule, std::size_t begin, std::size_t end) const {
    hits.push_back(make_hit(rule, sql, begin, end));
  }
};

// Members of a parsed statement paired with their source segments.
std::vector<std::pair<const sql::Statement*, Segment>> members(const sql::Statement& stmt,
                                                               const std::vector<Segment>& segments) {
  std::vector<std::pair<const sql::Statement*, Segment>> out;
  if (stmt.is<sql::Stacked>()) {
    const auto& list = stmt.as<sql::Stacked>().statements;
    for (std::size_t i = 0; i < list.size(); ++i) {
      out.emplace_back(&list[i], i < segments.size() ? segments[i] : Segment{});
    }
  } else {
    out.emplace_back(&stmt, segments.empty() ? Segment{} : segments.front());
  }
  return out;
}

void ast_rules(const RuleContext& ctx, const sql::Statement& stmt) {
  if (ctx.on("R1")) {
    std::vector<const sql::Expr*> wheres;
    where_clauses(stmt, wheres);
    for (const auto* w : wheres) {
      std::vector<const sql::Compare*> found;
      find_tautologies(*w, false, found);
      for (const auto* c : found) ctx.hit("R1", c->span.begin, c->span.end);
    }
  }
  const bool stacked = stmt.is<sql::Stacked>();
  for (const auto& [member, seg] : members(stmt, ctx.segments)) {
    auto classes = sql::statement_classes(*member);
    if (stacked && ctx.on("R2") && std::any_of(classes.begin(), classes.end(), is_write)) {
      ctx.hit("R2", seg.begin, seg.end);
    }
    if (ctx.on("R4") && member->is<sql::Union>()) {
      const auto& selects = member->as<sql::Union>().selects;
      std::vector<std::size_t> unions;
      for (std::size_t i = seg.first; i < seg.last; ++i) {
        if (ctx.tokens[i].is_keyword("UNION")) unions.push_back(i);
      }
      for (std::size_t s = 1; s < selects.size(); ++s) {
        const auto& table = selects[s].table;
        if (ctx.schema != nullptr ? ctx.schema->find_table(table) != nullptr : !is_system_table(table)) continue;
        std::size_t begin = s - 1 < unions.size() ? ctx.tokens[unions[s - 1]].offset : seg.begin;
        std::size_t end = s < unions.size() ? ctx.tokens[unions[s]].offset : seg.end;
        ctx.hit("R4", begin, end);
      }
    }
    if (ctx.on("R5")) {
      bool destructive = std::visit(Overloaded{
                                        [](const sql::Drop&) { return true; },
                                        [](const sql::Delete& d) { return !d.where.has_value(); },
                                        [](const sql::Update& u) { return !u.where.has_value(); },
                                        [](const auto&) { return false; },
                                    },
                                    member->node);
      if (destructive) ctx.hit("R5", seg.begin, seg.end);
    }
    for (auto c : classes) {
      if (!ctx.policy.allows(c)) {
        ctx.hit(kPolicyRule, seg.begin, seg.end);
        break;
      }
    }
  }
}

void token_rules(const RuleContext& ctx) {
  const auto& tokens = ctx.tokens;
  for (const auto& seg : ctx.segments) {
    bool in_where = false;
    std::size_t stop = seg.last;
    for (std::size_t i = seg.first; i < stop; ++i) {
      const Token& t = tokens[i];
      if (t.is_keyword("WHERE")) {
        in_where = true;
        continue;
      }
      if (!in_where) continue;
      if (ctx.on("R3") && t.kind == TokenKind::Comment && i > 0) {
        const Token& prev = tokens[i - 1];
        bool quoted = prev.kind == TokenKind::String ||
                      (prev.kind == TokenKind::Unknown && (prev.text == "'" || prev.text == "\""));
        if (quoted) ctx.hit("R3", prev.offset, t.end());
      }
      if (ctx.on("R6")) {
        if (t.kind == TokenKind::HexLiteral) {
          ctx.hit("R6", t.offset, t.end());
        } else if (obfuscating_call(t) && i + 1 < stop &&
                   (tokens[i + 1].kind == TokenKind::LParen || to_lower(tokens[i + 1].text) == "delay")) {
          std::size_t close = tokens[i + 1].kind == TokenKind::LParen ? matching_paren(tokens, i + 1, stop) : i + 2;
          ctx.hit("R6", t.offset, tokens[std::min(close, stop - 1)].end());
        } else if (t.kind == TokenKind::Identifier && (t.text == "x" || t.text == "X") && i + 1 < stop &&
                   tokens[i + 1].kind == TokenKind::String && tokens[i + 1].complete && tokens[i + 1].offset == t.end() &&
                   is_hex(tokens[i + 1].value)) {
          ctx.hit("R6", t.offset, tokens[i + 1].end());
        }
      }
    }
  }
}

void residue_rule(const RuleContext& ctx) {
  if (ctx.syntax.ok() || !ctx.on("R7")) return;
  std::optional<std::size_t> open;
  for (const auto& t : ctx.tokens) {
    if (t.kind == TokenKind::String && !t.complete) {
      open = t.offset;
      break;
    }
  }
  if (!open) {
    for (char q : {'\'', '"'}) {
      if (std::count(ctx.sql.begin(), ctx.sql.end(), q) % 2 == 1) {
        auto at = ctx.sql.find(q);
        open = open ? std::min(*open, at) : at;
      }
    }
  }
  if (!open) {
    // A leading bare word glued to a quote (x', admin') closes a literal
    // that was never opened: the shape of a payload cut from a quoted slot.
    auto q = ctx.sql.find_first_of("'\"");
    auto word = ctx.sql.find_first_not_of(" \t\r\n");
    if (q != std::string_view::npos && q > word &&
        std::all_of(ctx.sql.begin() + static_cast<std::ptrdiff_t>(word), ctx.sql.begin() + static_cast<std::ptrdiff_t>(q),
                    [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '%'; })) {
      open = q;
    }
  }
  if (!open) return;
  bool residue = contains_word_icase(ctx.sql, "OR") || contains_word_icase(ctx.sql, "UNION") ||
                 ctx.sql.find("--") != std::string_view::npos || ctx.sql.find(';') != std::string_view::npos;
  if (residue) ctx.hit("R7", *open, ctx.sql.size());
}

const char* const kDefaultPrompt =
    "You review SQL statements sent to a read-only analytics database.\n"
    "Decide whether the statement below is an injection attempt or otherwise malicious, "
    "for example an always-true condition, a second stacked command that writes or drops data, "
    "a comment that cuts off the rest of a condition, a UNION that reads system tables, "
    "or a hidden time delay. Ordinary read queries are benign.\n"
    "\n"
    "Statement:\n"
    "{sql}\n"
    "\n"
    "Reply with one word: malicious or benign.\n"
    "Answer:";

}  // namespace

std::string_view to_string(SyntaxStatus s) {
  switch (s) {
    case SyntaxStatus::Ok: return "Ok";
    case SyntaxStatus::SyntaxError: return "SyntaxError";
    case SyntaxStatus::Unsupported: return "Unsupported";
  }
  return "SyntaxError";
}

SyntaxVerdict check_syntax(std::string_view sql) {
  SyntaxVerdict v;
  try {
    v.statement = sql::parse(sql);
  } catch (const sql::ParseError& e) {
    v.status = e.kind() == sql::ParseErrorKind::UnsupportedFeature ? SyntaxStatus::Unsupported : SyntaxStatus::SyntaxError;
    v.detail = e.kind() == sql::ParseErrorKind::UnsupportedFeature ? e.detail() : e.what();
    v.offset = e.offset();
  }
  return v;
}

const std::vector<std::string>& rule_ids() {
  static const std::vector<std::string> ids{"R1", "R2", "R3", "R4", "R5", "R6", "R7"};
  return ids;
}

double rule_score(std::string_view rule) {
  if (rule == "R1") return 0.9;
  if (rule == "R2") return 1.0;
  if (rule == "R3") return 0.7;
  if (rule == "R4") return 0.9;
  if (rule == "R5") return 1.0;
  if (rule == "R6") return 0.8;
  if (rule == "R7") return 0.8;
  if (rule == kPolicyRule) return 0.6;
  return 0;
}

std::string_view rule_name(std::string_view rule) {
  if (rule == "R1") return "tautology";
  if (rule == "R2") return "stacked write";
  if (rule == "R3") return "comment truncation";
  if (rule == "R4") return "union probe";
  if (rule == "R5") return "unguarded destructive write";
  if (rule == "R6") return "obfuscation";
  if (rule == "R7") return "injection residue";
  if (rule == kPolicyRule) return "statement class not allowed";
  return "unknown";
}

void SecurityPolicy::validate() const {
  if (!(threshold >= 0.0 && threshold <= 1.0)) {
    throw CheckError("InvalidPolicy", "threshold must be in [0, 1]");
  }
  if (allow_classes.empty()) throw CheckError("InvalidPolicy", "allow_classes must not be empty");
  for (const auto& r : rules) {
    if (std::find(rule_ids().begin(), rule_ids().end(), r) == rule_ids().end()) {
      throw CheckError("InvalidPolicy", "unknown rule '" + r + "'");
    }
  }
}

bool SecurityPolicy::allows(sql::StatementClass c) const {
  if (allow_classes.count(c) > 0) return true;
  return allow_writes && (c == sql::StatementClass::Insert || c == sql::StatementClass::Update ||
                          c == sql::StatementClass::Delete);
}

SecurityPolicy SecurityPolicy::from_json(const nlohmann::json& j) {
  SecurityPolicy p;
  try {
    if (j.contains("rules")) {
      p.rules.clear();
      for (const auto& r : j.at("rules")) p.rules.insert(to_upper(r.get<std::string>()));
    }
    if (j.contains("threshold")) p.threshold = j.at("threshold").get<double>();
    if (j.contains("allow_classes")) {
      p.allow_classes.clear();
      for (const auto& c : j.at("allow_classes")) {
        auto name = to_lower(c.get<std::string>());
        bool found = false;
        for (auto cls : {sql::StatementClass::Select, sql::StatementClass::Insert, sql::StatementClass::Update,
                         sql::StatementClass::Delete, sql::StatementClass::Drop}) {
          if (sql::to_string(cls) == name) {
            p.allow_classes.insert(cls);
            found = true;
          }
        }
        if (!found) throw CheckError("InvalidPolicy", "unknown statement class '" + name + "'");
      }
    }
    if (j.contains("allow_writes")) p.allow_writes = j.at("allow_writes").get<bool>();
  } catch (const nlohmann::json::exception& e) {
    throw CheckError("InvalidPolicy", e.what());
  }
  p.validate();
  return p;
}

SecurityPolicy SecurityPolicy::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw CheckError("InvalidPolicy", "cannot open " + path.string());
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw CheckError("InvalidPolicy", path.string() + ": " + e.what());
  }
}

nlohmann::json SecurityPolicy::to_json() const {
  nlohmann::json classes = nlohmann::json::array();
  for (auto c : allow_classes) classes.push_back(std::string(sql::to_string(c)));
  return {{"rules", rules}, {"threshold", threshold}, {"allow_classes", classes}, {"allow_writes", allow_writes}};
}

nlohmann::json CheckVerdict::to_json() const {
  nlohmann::json hit_list = nlohmann::json::array();
  for (const auto& h : hits) {
    hit_list.push_back({{"rule", h.rule},
                        {"name", std::string(rule_name(h.rule))},
                        {"fragment", h.fragment},
                        {"begin", h.begin},
                        {"end", h.end},
                        {"score", h.score}});
  }
  nlohmann::json j{{"syntax", {{"status", std::string(to_string(syntax.status))}}},
                   {"security", blocked() ? "Block" : "Allow"},
                   {"rule_hits", hit_list},
                   {"score", score},
                   {"classifier_used", classifier_used},
                   {"classifier_score", classifier_score ? nlohmann::json(*classifier_score) : nlohmann::json()},
                   {"elapsed_us", elapsed.count()}};
  if (!syntax.ok()) {
    j["syntax"]["detail"] = syntax.detail;
    j["syntax"]["offset"] = syntax.offset;
  }
  if (!classifier_error.empty()) j["classifier_error"] = classifier_error;
  return j;
}

std::vector<RuleHit> evaluate_rules(std::string_view sql, const SyntaxVerdict& syntax, const SecurityPolicy& policy,
                                    const sql::Schema* schema) {
  sql::LexOptions lenient;
  lenient.lenient = true;
  auto tokens = sql::tokenize(sql, lenient);
  auto segments = segments_of(tokens);
  std::vector<RuleHit> hits;
  RuleContext ctx{sql, tokens, segments, syntax, policy, schema, hits};
  if (syntax.statement) ast_rules(ctx, *syntax.statement);
  token_rules(ctx);
  residue_rule(ctx);
  std::stable_sort(hits.begin(), hits.end(), [](const RuleHit& a, const RuleHit& b) {
    return std::tie(a.rule, a.begin) < std::tie(b.rule, b.begin);
  });
  return hits;
}

double parse_classifier_reply(std::string_view reply) {
  auto text = trim(reply);
  std::size_t end = 0;
  while (end < text.size() && !std::isspace(static_cast<unsigned char>(text[end]))) ++end;
  std::string word = to_lower(text.substr(0, end));
  while (!word.empty() && std::ispunct(static_cast<unsigned char>(word.back()))) word.pop_back();
  while (!word.empty() && std::ispunct(static_cast<unsigned char>(word.front())) && word.front() != '.') {
    word.erase(word.begin());
  }
  for (std::string_view yes : {"malicious", "unsafe", "yes", "injection", "block"}) {
    if (word == yes) return 1.0;
  }
  for (std::string_view no : {"benign", "safe", "no", "allow"}) {
    if (word == no) return 0.0;
  }
  if (!word.empty()) {
    char* stop = nullptr;
    double v = std::strtod(word.c_str(), &stop);
    if (stop == word.c_str() + word.size() && v >= 0.0 && v <= 1.0) return v;
  }
  throw CheckError("ClassifierUnparseable", "cannot read a verdict from reply '" + std::string(text.substr(0, 80)) + "'");
}

RemoteClassifier::RemoteClassifier(net::CompletionClient client, std::string prompt_template)
    : client_(std::move(client)), prompt_(std::move(prompt_template)) {
  if (prompt_.find("{sql}") == std::string::npos) {
    throw CheckError("InvalidPolicy", "classifier prompt has no {sql} placeholder");
  }
}

std::string RemoteClassifier::default_prompt() { return kDefaultPrompt; }

std::string RemoteClassifier::load_prompt(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckError("InvalidPolicy", "cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  auto text = buf.str();
  while (!text.empty() && (text.back() == '\n' || text.back() == '\r')) text.pop_back();
  return text;
}

std::string RemoteClassifier::prompt_for(std::string_view sql) const {
  std::string out = prompt_;
  auto at = out.find("{sql}");
  out.replace(at, 5, sql);
  return out;
}

double RemoteClassifier::score(std::string_view sql) const {
  return parse_classifier_reply(client_.complete(prompt_for(sql)));
}

Checker::Checker(SecurityPolicy policy, const sql::Schema* schema, std::shared_ptr<const Classifier> classifier)
    : policy_(std::move(policy)), schema_(schema), classifier_(std::move(classifier)) {
  policy_.validate();
}

CheckVerdict Checker::check(std::string_view sql) const {
  auto start = std::chrono::steady_clock::now();
  CheckVerdict v;
  v.syntax = check_syntax(sql);
  v.hits = evaluate_rules(sql, v.syntax, policy_, schema_);
  for (const auto& h : v.hits) v.score = std::max(v.score, h.score);
  bool classifier_blocks = false;
  if (classifier_) {
    try {
      double s = classifier_->score(sql);
      v.classifier_used = true;
      v.classifier_score = s;
      v.score = std::max(v.score, s);
      classifier_blocks = s >= policy_.threshold;
    } catch (const Error& e) {
      v.classifier_error = e.code() + ": " + e.what();
    }
  }
  v.security = !v.hits.empty() || classifier_blocks ? Security::Block : Security::Allow;
  v.elapsed = std::chrono::duration_cast<std::chrono::microseconds>(std::chrono::steady_clock::now() - start);
  return v;
}

std::vector<CheckVerdict> Checker::check_batch(std::span<const std::string> statements, bool parallel) const {
  std::vector<CheckVerdict> out(statements.size());
  const auto n = static_cast<long>(statements.size());
  if (!parallel) {
    for (long i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = check(statements[static_cast<std::size_t>(i)]);
    return out;
  }
#pragma omp parallel for schedule(dynamic, 8)
  for (long i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = check(statements[static_cast<std::size_t>(i)]);
  return out;
}

}  // namespace streamlink::check
