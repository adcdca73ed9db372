#pragma once

#include <atomic>
#include <chrono>
#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "expcopilot/retrieval.hpp"

namespace expcopilot {

inline constexpr int kDefaultMaxTokens = 512;
inline const std::string kDefaultStop = "\n\nDataset:";

struct CompletionRequest {
  std::string prompt;
  double temperature = 0.0;
  int max_tokens = kDefaultMaxTokens;
  std::vector<std::string> stop_sequences = {kDefaultStop};

  void validate() const;
};

// Text-completion and embedding backend. Implementations are safe to share
// across threads.
class Backend {
 public:
  virtual ~Backend() = default;

  virtual std::string complete(const CompletionRequest& req) = 0;
  virtual EmbeddingVector embed(std::string_view text) = 0;
  virtual std::string embed_model_tag() const = 0;
};

// Embeds every text with up to `max_parallel` concurrent requests; the result
// order matches the input order.
std::vector<EmbeddingVector> embed_all(Backend& backend, std::span<const std::string> texts,
                                       std::size_t max_parallel = 4);

std::string sha256_hex(std::string_view data);

// Deterministic stand-in LLM. Suggestion prompts (those asking to "recommend
// N ... configurations") are answered by echoing the configuration lines of
// the first demonstrated task; any other prompt is treated as an elicitation
// request and answered with a fixed guideline text keyed by the prompt hash.
// Embeddings come from the bag-of-words embedder.
class ScriptedBackend : public Backend {
 public:
  struct Options {
    // Returned for suggestion prompts without demonstrations.
    std::string default_response;
    std::size_t embed_dim = BagOfWordsEmbedder::kDefaultDim;
  };

  ScriptedBackend() : ScriptedBackend(Options{}) {}
  explicit ScriptedBackend(Options opts);

  std::string complete(const CompletionRequest& req) override;
  EmbeddingVector embed(std::string_view text) override;
  std::string embed_model_tag() const override { return embedder_.model_tag(); }

  std::size_t completion_calls() const { return completions_.load(); }
  std::size_t embedding_calls() const { return embeddings_.load(); }

  // Configuration lines of the first demonstrated task in a suggestion
  // prompt, in order ("cost is low. kernel is linear.").
  static std::vector<std::string> first_demonstration(std::string_view prompt);
  // N requested by a suggestion prompt, or nullopt for other prompts.
  static std::optional<int> requested_count(std::string_view prompt);

 private:
  Options opts_;
  BagOfWordsEmbedder embedder_;
  std::atomic<std::size_t> completions_{0};
  std::atomic<std::size_t> embeddings_{0};
};

// Appends every call on `inner` to a cassette file (JSON Lines of
// {prompt_sha256, request, response}). Writes are serialized internally.
class JournalingBackend : public Backend {
 public:
  JournalingBackend(std::shared_ptr<Backend> inner, std::filesystem::path cassette);

  std::string complete(const CompletionRequest& req) override;
  EmbeddingVector embed(std::string_view text) override;
  std::string embed_model_tag() const override { return inner_->embed_model_tag(); }

 private:
  void append(const std::string& line);

  std::shared_ptr<Backend> inner_;
  std::filesystem::path path_;
  std::mutex mu_;
};

// Serves calls from a cassette recorded by JournalingBackend.
class ReplayBackend : public Backend {
 public:
  explicit ReplayBackend(const std::filesystem::path& cassette);

  std::string complete(const CompletionRequest& req) override;
  EmbeddingVector embed(std::string_view text) override;
  std::string embed_model_tag() const override { return tag_; }

 private:
  struct Completion {
    double temperature;
    std::string text;
  };
  std::map<std::string, std::vector<Completion>> completions_;
  std::map<std::string, EmbeddingVector> embeddings_;
  std::string tag_;
};

// Records every prompt seen on the way to `inner`; used for call counting
// and prompt audits.
class RecordingBackend : public Backend {
 public:
  explicit RecordingBackend(Backend& inner) : inner_(inner) {}

  std::string complete(const CompletionRequest& req) override;
  EmbeddingVector embed(std::string_view text) override;
  std::string embed_model_tag() const override { return inner_.embed_model_tag(); }

  std::vector<CompletionRequest> requests() const;
  std::vector<std::string> embedded_texts() const;

 private:
  Backend& inner_;
  mutable std::mutex mu_;
  std::vector<CompletionRequest> requests_;
  std::vector<std::string> embedded_;
};

struct HttpSettings {
  std::string endpoint;  // e.g. "https://api.example.com/v1"
  std::string model;
  std::string embed_model;
  std::string api_key;
  int max_attempts = 3;
  std::chrono::milliseconds backoff_base{1000};
  std::chrono::seconds timeout{60};
  std::size_t max_in_flight = 4;
};

// OpenAI-compatible completions/embeddings client with retry on 429, 5xx and
// timeouts, exponential backoff and a bound on in-flight requests.
class HttpBackend : public Backend {
 public:
  explicit HttpBackend(HttpSettings settings);
  ~HttpBackend() override;

  std::string complete(const CompletionRequest& req) override;
  EmbeddingVector embed(std::string_view text) override;
  std::string embed_model_tag() const override { return "http:" + settings_.embed_model; }

  // Reads the bearer token from EXPCOPILOT_API_KEY.
  static std::string api_key_from_env();

 private:
  struct Impl;
  std::string post(const std::string& path, const std::string& body);

  HttpSettings settings_;
  std::unique_ptr<Impl> impl_;
};

}  // namespace expcopilot
