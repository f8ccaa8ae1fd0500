#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "streamlink/gen/generator.hpp"
#include "streamlink/gen/prompt.hpp"
#include "streamlink/net/completion.hpp"

namespace streamlink::gen {

// Pulls the SQL out of a model completion: the first fenced block if there
// is one; else the first line that opens with a statement keyword and
// tokenizes, cut at its first top-level semicolon; else the first non-empty
// line as-is (the checker decides what to make of it). nullopt when the
// completion is blank.
std::optional<std::string> extract_sql(std::string_view completion);

// Prompts a served model through the completion protocol.
// Errors: BackendUnreachable, BackendTimeout, BackendProtocol (NetError),
// EmptyCompletion (GenerateError).
class RemoteBackend : public Backend {
 public:
  RemoteBackend(std::string id, net::CompletionClient client, std::vector<Exemplar> exemplars = {});

  const std::string& id() const override { return id_; }
  GenerationResult generate(const GenerationRequest& request) const override;

  const net::CompletionClient& client() const { return client_; }

 private:
  std::string id_;
  net::CompletionClient client_;
  std::vector<Exemplar> exemplars_;
};

// Serves stored predictions keyed by question text (whitespace-trimmed).
// Used to score the output of a model run offline.
class ReplayBackend : public Backend {
 public:
  explicit ReplayBackend(std::map<std::string, std::string> answers, std::string id = "replay");

  // JSON-lines with {"question": ..., "sql": ...} (or "pred"/"query").
  static ReplayBackend load(const std::string& path);

  const std::string& id() const override { return id_; }
  GenerationResult generate(const GenerationRequest& request) const override;

 private:
  std::map<std::string, std::string> answers_;
  std::string id_;
};

}  // namespace streamlink::gen
