#include "expcopilot/gateway.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <fstream>
#include <regex>
#include <sstream>
#include <thread>

#include "expcopilot/error.hpp"
#include "expcopilot/rng.hpp"
#include "json.hpp"

namespace expcopilot {

using json = nlohmann::json;

void CompletionRequest::validate() const {
  if (prompt.empty()) throw Error("completion request: empty prompt");
  if (!(temperature >= 0.0 && temperature <= 1.0))
    throw Error("completion request: temperature must be in [0, 1]");
  if (max_tokens < 1) throw Error("completion request: max_tokens must be >= 1");
}

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw Error("sha256 failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xf]);
  }
  return out;
}

std::vector<EmbeddingVector> embed_all(Backend& backend, std::span<const std::string> texts,
                                       std::size_t max_parallel) {
  std::vector<EmbeddingVector> out(texts.size());
  if (texts.empty()) return out;
  const std::size_t workers = std::clamp<std::size_t>(max_parallel, 1, texts.size());
  if (workers == 1) {
    for (std::size_t i = 0; i < texts.size(); ++i) out[i] = backend.embed(texts[i]);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::mutex err_mu;
  std::exception_ptr first_error;
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < texts.size(); i = next++) {
          try {
            out[i] = backend.embed(texts[i]);
          } catch (...) {
            std::lock_guard lock(err_mu);
            if (!first_error) first_error = std::current_exception();
          }
        }
      });
    }
  }
  if (first_error) std::rethrow_exception(first_error);
  return out;
}

// ---------------------------------------------------------------------------
// Scripted

namespace {

const std::regex& configuration_line() {
  static const std::regex re(R"(^\s*configuration\s+\d+\s*:\s*(.*?)\s*$)", std::regex::icase);
  return re;
}

std::vector<std::string> split_lines(std::string_view text) {
  std::vector<std::string> lines;
  std::string cur;
  for (char c : text) {
    if (c == '\n') {
      lines.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  lines.push_back(std::move(cur));
  return lines;
}

const std::vector<std::string>& guideline_bank() {
  static const std::vector<std::string> bank = {
      "Configurations that ranked best on closely related datasets are a strong starting point.",
      "Datasets with many features tend to prefer stronger regularization.",
      "Small datasets tend to favor simpler models and conservative settings.",
      "Settings near the middle of the observed ranges are rarely far from the best.",
      "When two datasets share a domain, their best configurations tend to coincide.",
      "Extreme values are only worthwhile when the most similar datasets used them.",
  };
  return bank;
}

}  // namespace

ScriptedBackend::ScriptedBackend(Options opts) : opts_(std::move(opts)), embedder_(opts_.embed_dim) {}

std::optional<int> ScriptedBackend::requested_count(std::string_view prompt) {
  static const std::regex re(R"(recommend\s+(\d+)\s)", std::regex::icase);
  std::match_results<std::string_view::const_iterator> m;
  if (!std::regex_search(prompt.begin(), prompt.end(), m, re)) return std::nullopt;
  return std::stoi(m[1].str());
}

std::vector<std::string> ScriptedBackend::first_demonstration(std::string_view prompt) {
  const auto lines = split_lines(prompt);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].rfind("Dataset:", 0) != 0) continue;
    std::vector<std::string> configs;
    std::smatch m;
    for (std::size_t j = i + 1; j < lines.size() && std::regex_match(lines[j], m, configuration_line()); ++j)
      configs.push_back(m[1].str());
    if (!configs.empty()) return configs;
  }
  return {};
}

std::string ScriptedBackend::complete(const CompletionRequest& req) {
  req.validate();
  ++completions_;
  if (auto n = requested_count(req.prompt)) {
    const auto demo = first_demonstration(req.prompt);
    if (demo.empty()) return opts_.default_response;
    std::string out;
    const auto count = std::min<std::size_t>(demo.size(), static_cast<std::size_t>(std::max(*n, 0)));
    for (std::size_t i = 0; i < count; ++i) {
      if (i) out += '\n';
      out += "Configuration " + std::to_string(i + 1) + ": " + demo[i];
    }
    return out;
  }
  const std::uint64_t h = fnv1a64(req.prompt);
  const auto& bank = guideline_bank();
  char tag[17];
  std::snprintf(tag, sizeof(tag), "%016llx", static_cast<unsigned long long>(h));
  std::ostringstream out;
  out << "1. " << bank[h % bank.size()] << "\n";
  out << "2. " << bank[(h >> 16) % bank.size()] << "\n";
  out << "3. Observation set " << std::string(tag, 8) << ".";
  return out.str();
}

EmbeddingVector ScriptedBackend::embed(std::string_view text) {
  ++embeddings_;
  return embedder_.embed(text);
}

// ---------------------------------------------------------------------------
// Journal / replay

namespace {

json request_json(const CompletionRequest& req) {
  return json{{"kind", "complete"},
              {"prompt", req.prompt},
              {"temperature", req.temperature},
              {"max_tokens", req.max_tokens},
              {"stop", req.stop_sequences}};
}

}  // namespace

JournalingBackend::JournalingBackend(std::shared_ptr<Backend> inner, std::filesystem::path cassette)
    : inner_(std::move(inner)), path_(std::move(cassette)) {
  if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
}

void JournalingBackend::append(const std::string& line) {
  std::lock_guard lock(mu_);
  std::ofstream out(path_, std::ios::app);
  if (!out) throw BackendError("cannot append to journal " + path_.string());
  out << line << '\n';
}

std::string JournalingBackend::complete(const CompletionRequest& req) {
  std::string text = inner_->complete(req);
  json line{{"prompt_sha256", sha256_hex(req.prompt)},
            {"request", request_json(req)},
            {"response", json{{"text", text}}}};
  append(line.dump());
  return text;
}

EmbeddingVector JournalingBackend::embed(std::string_view text) {
  EmbeddingVector v = inner_->embed(text);
  json line{{"prompt_sha256", sha256_hex(text)},
            {"request", json{{"kind", "embed"}, {"input", std::string(text)}}},
            {"response", json{{"embedding", v.values}, {"model_tag", v.model_tag}}}};
  append(line.dump());
  return v;
}

ReplayBackend::ReplayBackend(const std::filesystem::path& cassette) {
  std::ifstream in(cassette);
  if (!in) throw ConfigError("replay cassette not found: " + cassette.string());
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      const std::string sha = j.at("prompt_sha256").get<std::string>();
      const json& req = j.at("request");
      const json& resp = j.at("response");
      if (req.value("kind", "complete") == "embed") {
        EmbeddingVector v{resp.at("embedding").get<std::vector<double>>(),
                          resp.at("model_tag").get<std::string>()};
        if (tag_.empty()) tag_ = v.model_tag;
        embeddings_.emplace(sha, std::move(v));
      } else {
        completions_[sha].push_back(
            {req.value("temperature", 0.0), resp.at("text").get<std::string>()});
      }
    } catch (const json::exception& e) {
      throw LoadError(cassette.string(), lineno, e.what());
    }
  }
}

std::string ReplayBackend::complete(const CompletionRequest& req) {
  req.validate();
  const std::string sha = sha256_hex(req.prompt);
  auto it = completions_.find(sha);
  if (it == completions_.end()) throw BackendError("replay miss: no recording for prompt sha256 " + sha);
  for (const auto& c : it->second)
    if (c.temperature == req.temperature) return c.text;
  return it->second.front().text;
}

EmbeddingVector ReplayBackend::embed(std::string_view text) {
  const std::string sha = sha256_hex(text);
  auto it = embeddings_.find(sha);
  if (it == embeddings_.end()) throw BackendError("replay miss: no embedding recorded for sha256 " + sha);
  return it->second;
}

// ---------------------------------------------------------------------------
// Recording

std::string RecordingBackend::complete(const CompletionRequest& req) {
  {
    std::lock_guard lock(mu_);
    requests_.push_back(req);
  }
  return inner_.complete(req);
}

EmbeddingVector RecordingBackend::embed(std::string_view text) {
  {
    std::lock_guard lock(mu_);
    embedded_.emplace_back(text);
  }
  return inner_.embed(text);
}

std::vector<CompletionRequest> RecordingBackend::requests() const {
  std::lock_guard lock(mu_);
  return requests_;
}

std::vector<std::string> RecordingBackend::embedded_texts() const {
  std::lock_guard lock(mu_);
  return embedded_;
}

}  // namespace expcopilot
