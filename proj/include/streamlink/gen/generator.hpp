#pragma once

#include <chrono>
#include <cstddef>
#include <string>
#include <vector>

#include "streamlink/error.hpp"
#include "streamlink/sql/schema.hpp"

namespace streamlink::gen {

// NoMatch, ExemplarInvalid, EmptyCompletion, InvalidArgument, ConfigInvalid.
class GenerateError : public Error {
 public:
  using Error::Error;
};

struct GenerationRequest {
  std::string nl_query;
  const sql::Schema* schema = nullptr;
  std::string backend;  // requested backend id; empty = any
  std::size_t max_candidates = 1;

  // Throws InvalidArgument when the query is blank or the schema missing.
  void validate() const;
};

struct GenerationResult {
  std::vector<std::string> candidates;  // raw SQL, not yet checked
  std::string backend;
  std::string prompt;  // empty for backends that do not prompt a model
  std::chrono::microseconds elapsed{0};
};

// One way of turning a question into SQL. Implementations are safe to call
// from several threads at once.
class Backend {
 public:
  virtual ~Backend() = default;
  virtual const std::string& id() const = 0;
  virtual GenerationResult generate(const GenerationRequest& request) const = 0;
};

}  // namespace streamlink::gen
