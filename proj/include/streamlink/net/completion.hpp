#pragma once

#include <chrono>
#include <cstddef>
#include <memory>
#include <semaphore>
#include <string>
#include <string_view>

#include <json.hpp>

#include "streamlink/error.hpp"

namespace streamlink::net {

// BackendUnreachable, BackendTimeout or BackendProtocol.
class NetError : public Error {
 public:
  using Error::Error;
};

// http://host[:port][/path]. Only plain HTTP: backends are expected on the
// local network.
struct Endpoint {
  std::string host;
  int port = 80;
  std::string path = "/";

  static Endpoint parse(std::string_view url);
  std::string url() const;
};

// Maps the completion protocol onto a particular model server. The defaults
// speak the native protocol: POST {"prompt","max_tokens","temperature"},
// reply {"text"}. An OpenAI-style server needs text_pointer "/choices/0/text".
struct CompletionAdapter {
  std::string prompt_field = "prompt";
  std::string max_tokens_field = "max_tokens";
  std::string temperature_field = "temperature";
  std::string text_pointer = "/text";  // JSON pointer into the reply
  nlohmann::json extra_fields = nlohmann::json::object();

  static CompletionAdapter from_json(const nlohmann::json& j);
};

struct CompletionOptions {
  int max_tokens = 256;
  double temperature = 0.0;
  std::chrono::milliseconds timeout{30'000};
  std::size_t max_concurrency = 4;  // per endpoint, shared by all clients
  CompletionAdapter adapter;
};

class CompletionClient {
 public:
  CompletionClient(Endpoint endpoint, CompletionOptions options);

  // Sends one prompt and returns the completion text. The whole call,
  // including waiting for a concurrency slot, is bounded by the timeout.
  std::string complete(const std::string& prompt) const;

  const Endpoint& endpoint() const { return endpoint_; }
  const CompletionOptions& options() const { return options_; }

 private:
  Endpoint endpoint_;
  CompletionOptions options_;
  std::shared_ptr<std::counting_semaphore<1024>> slots_;
};

// GET `path` on the endpoint's host; true iff it answers 2xx within the timeout.
bool probe_http(const Endpoint& endpoint, std::string_view path, std::chrono::milliseconds timeout);

}  // namespace streamlink::net
