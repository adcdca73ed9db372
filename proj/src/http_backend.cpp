#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"

#include <cstdlib>
#include <semaphore>
#include <thread>

#include "expcopilot/error.hpp"
#include "expcopilot/gateway.hpp"
#include "json.hpp"

namespace expcopilot {

using json = nlohmann::json;

namespace {

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string prefix;  // path prefix without trailing slash
};

Endpoint split_endpoint(const std::string& url) {
  const auto scheme = url.find("://");
  if (scheme == std::string::npos) throw ConfigError("endpoint must include a scheme: " + url);
  const auto slash = url.find('/', scheme + 3);
  Endpoint e;
  e.origin = url.substr(0, slash);
  e.prefix = slash == std::string::npos ? "" : url.substr(slash);
  while (!e.prefix.empty() && e.prefix.back() == '/') e.prefix.pop_back();
  return e;
}

bool transient_status(int status) { return status == 429 || (status >= 500 && status <= 599); }

bool transient_error(httplib::Error err) {
  return err == httplib::Error::Read || err == httplib::Error::Write ||
         err == httplib::Error::ConnectionTimeout;
}

}  // namespace

struct HttpBackend::Impl {
  explicit Impl(std::size_t limit) : slots(static_cast<std::ptrdiff_t>(limit)) {}
  Endpoint endpoint;
  std::counting_semaphore<> slots;
};

HttpBackend::HttpBackend(HttpSettings settings) : settings_(std::move(settings)) {
  if (settings_.api_key.empty()) throw ConfigError("http backend requires EXPCOPILOT_API_KEY");
  if (settings_.model.empty()) throw ConfigError("http backend requires a model name");
  if (settings_.max_attempts < 1) throw ConfigError("http backend: max_attempts must be >= 1");
  if (settings_.max_in_flight < 1) throw ConfigError("http backend: max_in_flight must be >= 1");
  impl_ = std::make_unique<Impl>(settings_.max_in_flight);
  impl_->endpoint = split_endpoint(settings_.endpoint);
}

HttpBackend::~HttpBackend() = default;

std::string HttpBackend::api_key_from_env() {
  const char* key = std::getenv("EXPCOPILOT_API_KEY");
  return key ? std::string(key) : std::string();
}

std::string HttpBackend::post(const std::string& path, const std::string& body) {
  impl_->slots.acquire();
  struct Release {
    std::counting_semaphore<>& s;
    ~Release() { s.release(); }
  } release{impl_->slots};

  httplib::Client client(impl_->endpoint.origin);
  client.set_connection_timeout(settings_.timeout);
  client.set_read_timeout(settings_.timeout);
  client.set_write_timeout(settings_.timeout);
  client.set_bearer_token_auth(settings_.api_key);

  std::string last_error;
  for (int attempt = 0; attempt < settings_.max_attempts; ++attempt) {
    if (attempt > 0) std::this_thread::sleep_for(settings_.backoff_base * (1 << (attempt - 1)));
    auto res = client.Post(impl_->endpoint.prefix + path, body, "application/json");
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      if (transient_error(res.error())) continue;
      break;
    }
    if (res->status >= 200 && res->status < 300) return res->body;
    last_error = "HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 200);
    if (!transient_status(res->status)) break;
  }
  throw BackendError(path + " failed: " + last_error);
}

std::string HttpBackend::complete(const CompletionRequest& req) {
  req.validate();
  json body{{"model", settings_.model},
            {"prompt", req.prompt},
            {"temperature", req.temperature},
            {"max_tokens", req.max_tokens}};
  if (!req.stop_sequences.empty()) body["stop"] = req.stop_sequences;
  const std::string raw = post("/completions", body.dump());
  try {
    return json::parse(raw).at("choices").at(0).at("text").get<std::string>();
  } catch (const json::exception& e) {
    throw BackendError(std::string("malformed completions response: ") + e.what());
  }
}

EmbeddingVector HttpBackend::embed(std::string_view text) {
  if (text.empty()) throw Error("embed: empty text");
  json body{{"model", settings_.embed_model}, {"input", std::string(text)}};
  const std::string raw = post("/embeddings", body.dump());
  try {
    EmbeddingVector v{json::parse(raw).at("data").at(0).at("embedding").get<std::vector<double>>(),
                      embed_model_tag()};
    if (v.values.empty()) throw BackendError("empty embedding returned");
    return v;
  } catch (const json::exception& e) {
    throw BackendError(std::string("malformed embeddings response: ") + e.what());
  }
}

}  // namespace expcopilot
