#include "streamlink/net/completion.hpp"

#include <map>
#include <mutex>

#include <httplib.h>

namespace streamlink::net {

namespace {

std::shared_ptr<std::counting_semaphore<1024>> slots_for(const std::string& key, std::size_t cap) {
  static std::mutex mu;
  static std::map<std::string, std::shared_ptr<std::counting_semaphore<1024>>> slots;
  std::lock_guard lock(mu);
  auto& s = slots[key];
  if (!s) s = std::make_shared<std::counting_semaphore<1024>>(static_cast<std::ptrdiff_t>(std::clamp<std::size_t>(cap, 1, 1024)));
  return s;
}

void configure(httplib::Client& client, std::chrono::milliseconds timeout) {
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);
  client.set_keep_alive(false);
}

}  // namespace

Endpoint Endpoint::parse(std::string_view url) {
  Endpoint ep;
  std::string_view rest = url;
  if (rest.substr(0, 7) == "http://") {
    rest.remove_prefix(7);
  } else if (rest.find("://") != std::string_view::npos) {
    throw NetError("InvalidArgument", "only http:// endpoints are supported: " + std::string(url));
  }
  auto slash = rest.find('/');
  std::string_view hostport = rest.substr(0, slash);
  ep.path = slash == std::string_view::npos ? "/" : std::string(rest.substr(slash));
  auto colon = hostport.rfind(':');
  if (colon != std::string_view::npos) {
    ep.host = std::string(hostport.substr(0, colon));
    try {
      ep.port = std::stoi(std::string(hostport.substr(colon + 1)));
    } catch (const std::exception&) {
      throw NetError("InvalidArgument", "bad port in endpoint " + std::string(url));
    }
  } else {
    ep.host = std::string(hostport);
  }
  if (ep.host.empty() || ep.port <= 0 || ep.port > 65535) {
    throw NetError("InvalidArgument", "bad endpoint " + std::string(url));
  }
  return ep;
}

std::string Endpoint::url() const { return "http://" + host + ":" + std::to_string(port) + path; }

CompletionAdapter CompletionAdapter::from_json(const nlohmann::json& j) {
  CompletionAdapter a;
  a.prompt_field = j.value("prompt_field", a.prompt_field);
  a.max_tokens_field = j.value("max_tokens_field", a.max_tokens_field);
  a.temperature_field = j.value("temperature_field", a.temperature_field);
  a.text_pointer = j.value("text_pointer", a.text_pointer);
  if (j.contains("extra_fields")) a.extra_fields = j.at("extra_fields");
  return a;
}

CompletionClient::CompletionClient(Endpoint endpoint, CompletionOptions options)
    : endpoint_(std::move(endpoint)),
      options_(std::move(options)),
      slots_(slots_for(endpoint_.host + ":" + std::to_string(endpoint_.port), options_.max_concurrency)) {}

std::string CompletionClient::complete(const std::string& prompt) const {
  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  const auto deadline = start + options_.timeout;

  if (!slots_->try_acquire_until(deadline)) {
    throw NetError("BackendTimeout", "no free connection slot for " + endpoint_.url());
  }
  struct Release {
    std::counting_semaphore<1024>& s;
    ~Release() { s.release(); }
  } release{*slots_};

  const auto& ad = options_.adapter;
  nlohmann::json body = ad.extra_fields.is_object() ? ad.extra_fields : nlohmann::json::object();
  body[ad.prompt_field] = prompt;
  body[ad.max_tokens_field] = options_.max_tokens;
  body[ad.temperature_field] = options_.temperature;

  auto remaining = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now());
  if (remaining.count() <= 0) throw NetError("BackendTimeout", "timed out before sending to " + endpoint_.url());
  httplib::Client client(endpoint_.host, endpoint_.port);
  configure(client, remaining);

  httplib::Request req;
  req.method = "POST";
  req.path = endpoint_.path;
  req.body = body.dump();
  req.set_header("Content-Type", "application/json");
  req.progress = [&](std::uint64_t, std::uint64_t) { return Clock::now() < deadline; };

  httplib::Response res;
  httplib::Error err = httplib::Error::Success;
  bool ok = client.send(req, res, err);
  if (!ok) {
    bool timed_out = err == httplib::Error::Canceled ||
                     ((err == httplib::Error::Read || err == httplib::Error::Write) &&
                      Clock::now() - start >= options_.timeout * 9 / 10);
    if (timed_out) {
      throw NetError("BackendTimeout", endpoint_.url() + " did not answer within " +
                                           std::to_string(options_.timeout.count()) + " ms");
    }
    throw NetError("BackendUnreachable", endpoint_.url() + ": " + httplib::to_string(err));
  }
  if (Clock::now() >= deadline) {
    throw NetError("BackendTimeout", endpoint_.url() + " did not answer within " +
                                         std::to_string(options_.timeout.count()) + " ms");
  }
  if (res.status < 200 || res.status >= 300) {
    throw NetError("BackendProtocol", endpoint_.url() + " answered HTTP " + std::to_string(res.status));
  }
  nlohmann::json reply;
  try {
    reply = nlohmann::json::parse(res.body);
  } catch (const nlohmann::json::exception&) {
    throw NetError("BackendProtocol", endpoint_.url() + " returned a non-JSON body");
  }
  nlohmann::json::json_pointer ptr(ad.text_pointer);
  if (!reply.contains(ptr) || !reply.at(ptr).is_string()) {
    throw NetError("BackendProtocol", endpoint_.url() + " reply lacks a string at " + ad.text_pointer);
  }
  return reply.at(ptr).get<std::string>();
}

bool probe_http(const Endpoint& endpoint, std::string_view path, std::chrono::milliseconds timeout) {
  httplib::Client client(endpoint.host, endpoint.port);
  configure(client, timeout);
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  httplib::Headers headers;
  auto res = client.Get(std::string(path), headers,
                        [&](std::uint64_t, std::uint64_t) { return std::chrono::steady_clock::now() < deadline; });
  return res && res->status >= 200 && res->status < 300;
}

}  // namespace streamlink::net
