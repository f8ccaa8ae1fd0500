#include "streamlink/gen/remote_backend.hpp"

#include <cctype>
#include <chrono>
#include <fstream>

#include <json.hpp>

#include "streamlink/sql/lexer.hpp"
#include "streamlink/strings.hpp"

namespace streamlink::gen {

namespace {

std::vector<std::string_view> lines_of(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    out.push_back(text.substr(pos, nl - pos));
    pos = nl + 1;
  }
  return out;
}

bool opens_statement(std::string_view line) {
  for (std::string_view kw : {"SELECT", "INSERT", "UPDATE", "DELETE", "DROP", "WITH"}) {
    if (starts_with_icase(line, kw) &&
        (line.size() == kw.size() || !std::isalnum(static_cast<unsigned char>(line[kw.size()])))) {
      return true;
    }
  }
  return false;
}

}  // namespace

std::optional<std::string> extract_sql(std::string_view completion) {
  auto fence = completion.find("```");
  if (fence != std::string_view::npos) {
    auto body = completion.find('\n', fence);
    if (body != std::string_view::npos) {
      auto close = completion.find("```", body + 1);
      auto inner = trim(completion.substr(body + 1, close == std::string_view::npos ? std::string_view::npos : close - body - 1));
      if (!inner.empty()) return std::string(inner);
    }
  }
  for (auto raw : lines_of(completion)) {
    auto line = trim(raw);
    if (!opens_statement(line)) continue;
    sql::LexOptions lenient;
    lenient.lenient = true;
    auto tokens = sql::tokenize(line, lenient);
    std::size_t end = line.size();
    bool clean = true;
    for (const auto& t : tokens) {
      if (t.kind == sql::TokenKind::Semicolon) {
        end = t.offset;
        break;
      }
      if (t.kind == sql::TokenKind::Unknown || !t.complete) clean = false;
    }
    if (!clean) continue;
    auto stmt = trim(line.substr(0, end));
    if (!stmt.empty()) return std::string(stmt);
  }
  for (auto raw : lines_of(completion)) {
    auto line = trim(raw);
    if (!line.empty() && line.substr(0, 3) != "```") return std::string(line);
  }
  return std::nullopt;
}

RemoteBackend::RemoteBackend(std::string id, net::CompletionClient client, std::vector<Exemplar> exemplars)
    : id_(std::move(id)), client_(std::move(client)), exemplars_(std::move(exemplars)) {}

GenerationResult RemoteBackend::generate(const GenerationRequest& request) const {
  request.validate();
  const auto start = std::chrono::steady_clock::now();
  GenerationResult result;
  result.backend = id_;
  result.prompt = build_prompt(*request.schema, exemplars_, request.nl_query).text;
  std::string text = client_.complete(result.prompt);
  auto sql = extract_sql(text);
  if (!sql) throw GenerateError("EmptyCompletion", client_.endpoint().url() + " returned no SQL");
  result.candidates.push_back(std::move(*sql));
  result.elapsed = std::chrono::duration_cast<std::chrono::microseconds>(std::chrono::steady_clock::now() - start);
  return result;
}

ReplayBackend::ReplayBackend(std::map<std::string, std::string> answers, std::string id)
    : answers_(std::move(answers)), id_(std::move(id)) {}

ReplayBackend ReplayBackend::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw GenerateError("IoError", "cannot open prediction file " + path);
  std::map<std::string, std::string> answers;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (trim(line).empty()) continue;
    try {
      auto j = nlohmann::json::parse(line);
      std::string sql;
      for (const char* key : {"sql", "pred", "query"}) {
        if (j.contains(key)) {
          sql = j.at(key).get<std::string>();
          break;
        }
      }
      answers[std::string(trim(j.at("question").get<std::string>()))] = sql;
    } catch (const nlohmann::json::exception& e) {
      throw GenerateError("ConfigInvalid", path + " line " + std::to_string(n) + ": " + e.what());
    }
  }
  return ReplayBackend(std::move(answers));
}

GenerationResult ReplayBackend::generate(const GenerationRequest& request) const {
  request.validate();
  auto it = answers_.find(std::string(trim(request.nl_query)));
  if (it == answers_.end()) throw GenerateError("NoMatch", "no stored prediction for this question");
  GenerationResult result;
  result.backend = id_;
  result.candidates.push_back(it->second);
  return result;
}

}  // namespace streamlink::gen
