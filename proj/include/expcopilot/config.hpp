#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "expcopilot/elicitation.hpp"
#include "expcopilot/gateway.hpp"
#include "expcopilot/harness.hpp"
#include "expcopilot/prompt.hpp"
#include "expcopilot/suggestion.hpp"

namespace expcopilot {

enum class BackendKind { scripted, http, replay };

struct BackendConfig {
  BackendKind kind = BackendKind::scripted;
  HttpSettings http;  // api_key is never read from the config
  std::filesystem::path cassette;  // replay source
  std::filesystem::path record;    // optional journal of every call
  std::string default_response;    // scripted backend
};

struct AppConfig {
  std::uint64_t seed = 0;
  BackendConfig backend;
  std::filesystem::path benchmark;  // bundle directory
  std::filesystem::path space;
  std::filesystem::path tasks;
  std::filesystem::path history;
  std::filesystem::path pools = "pools";
  std::filesystem::path knowledge;  // defaults to <pools>/knowledge.jsonl
  std::filesystem::path output = "out";
  SuggestionConfig suggestion;
  ElicitationConfig elicitation;
  std::vector<Method> methods = {Method::random, Method::constant, Method::nearest, Method::copilot};
  std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4};
  bool eval_elicit = false;
  Direction direction = Direction::higher_better;  // history ingest only

  std::filesystem::path knowledge_path() const {
    return knowledge.empty() ? pools / "knowledge.jsonl" : knowledge;
  }
};

// Reads a JSON config file. Relative paths resolve against the file's
// directory. Any "api_key" field is rejected: the key comes from
// EXPCOPILOT_API_KEY only.
AppConfig load_config(const std::filesystem::path& path);
AppConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);

BackendKind parse_backend_kind(std::string_view text);

std::shared_ptr<Backend> make_backend(const BackendConfig& cfg);

// Persisted offline state of one space, as written by cmd_ingest.
struct PoolBundle {
  SolutionSpace space;
  std::vector<Task> tasks;
  DiscretizerSet discretizers;
  ExperiencePool pool;
};

PoolBundle load_pool_bundle(const std::filesystem::path& dir);

// The four commands. Progress goes to `log`; cmd_suggest writes JSON Lines
// to `out` and, when show_prompt is set, the exact prompt to `log`.
void cmd_ingest(const AppConfig& cfg, Backend& backend, std::ostream& log);
ElicitationResult cmd_elicit(const AppConfig& cfg, Backend& backend, std::ostream& log);

struct SuggestRequest {
  Task task;
  std::optional<std::filesystem::path> space_override;
  bool show_prompt = false;
};
SuggestionSet cmd_suggest(const AppConfig& cfg, const SuggestRequest& req, Backend& backend,
                          std::ostream& out, std::ostream& log);

EvalReport cmd_eval(const AppConfig& cfg, Backend* backend, std::ostream& log);

// Reads a task file: a JSON object with "description" and optional
// "task_id", "space_id", "meta_features".
Task load_task_file(const std::filesystem::path& path, const std::string& default_space);

// Exit code for an exception escaping a command: 2 config, 3 backend,
// 4 parse, 1 anything else.
int exit_code_for(const std::exception& e);

}  // namespace expcopilot
