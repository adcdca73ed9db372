#include "doctest.h"

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "expcopilot/config.hpp"
#include "expcopilot/error.hpp"
#include "json.hpp"
#include "support.hpp"

using namespace expcopilot;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("expcopilot_cli_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

fs::path write_config(const fs::path& dir, json extra = json::object()) {
  json j{{"seed", 3},
         {"backend", {{"kind", "scripted"}}},
         {"paths", {{"benchmark", (testsupport::kFixtures / "synthetic").string()}, {"pools", "pools"}, {"output", "out"}}},
         {"elicitation", {{"rounds", 3}, {"patience", 2}}},
         {"eval", {{"methods", {"random", "copilot"}}, {"seeds", {0}}}}};
  j.merge_patch(extra);
  const fs::path p = dir / "config.json";
  std::ofstream(p) << j.dump(2);
  return p;
}

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

Run run_cli(const fs::path& dir, const std::string& args) {
  const fs::path out = dir / "stdout.txt", err = dir / "stderr.txt";
  const std::string cmd = std::string("\"") + EXPCOPILOT_CLI + "\" " + args + " >\"" + out.string() + "\" 2>\"" +
                          err.string() + "\"";
  const int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = testsupport::slurp(out);
  r.err = testsupport::slurp(err);
  return r;
}

std::string cfg_arg(const fs::path& config) { return "--config \"" + config.string() + "\""; }

}  // namespace

TEST_CASE("config parsing") {
  const fs::path base = "/base";
  const auto c = config_from_json(json::parse(R"({
    "seed": 9, "direction": "lower_better",
    "backend": {"kind": "http", "endpoint": "https://x/v1", "model": "m", "backoff_ms": 5, "max_attempts": 2},
    "paths": {"benchmark": "bench", "pools": "/abs/pools"},
    "suggestion": {"k_tasks": "fill-budget", "n_suggestions": 5},
    "eval": {"methods": ["constant", "pipeline"], "seeds": [7]}
  })"), base);
  CHECK(c.seed == 9);
  CHECK(c.direction == Direction::lower_better);
  CHECK(c.backend.kind == BackendKind::http);
  CHECK(c.backend.http.backoff_base == std::chrono::milliseconds(5));
  CHECK(c.backend.http.max_attempts == 2);
  CHECK(c.benchmark == base / "bench");
  CHECK(c.pools == fs::path("/abs/pools"));
  CHECK(c.output == base / "out");
  CHECK(c.knowledge_path() == fs::path("/abs/pools/knowledge.jsonl"));
  CHECK_FALSE(c.suggestion.k_tasks.has_value());
  CHECK(c.suggestion.n_suggestions == 5);
  CHECK(c.methods == std::vector<Method>{Method::constant, Method::copilot});
  CHECK(c.seeds == std::vector<std::uint64_t>{7});

  CHECK_THROWS_AS(config_from_json(json::parse(R"({"backend": {"api_key": "sk-123"}})"), base), ConfigError);
  CHECK_THROWS_AS(config_from_json(json::parse(R"({"api_key": "sk-123"})"), base), ConfigError);
  CHECK_THROWS_AS(config_from_json(json::parse(R"({"sed": 1})"), base), ConfigError);
  CHECK_THROWS_AS(config_from_json(json::parse(R"({"seed": "x"})"), base), ConfigError);
  CHECK_THROWS_AS(config_from_json(json::parse(R"({"suggestion": {"k_tasks": "all"}})"), base), ConfigError);
  CHECK_THROWS_AS(config_from_json(json::parse(R"({"backend": {"kind": "magic"}})"), base), ConfigError);
}

TEST_CASE("the http backend needs the key from the environment") {
  BackendConfig b;
  b.kind = BackendKind::http;
  b.http.endpoint = "http://127.0.0.1:1/v1";
  b.http.model = "m";
  unsetenv("EXPCOPILOT_API_KEY");
  CHECK_THROWS_AS(make_backend(b), ConfigError);
  setenv("EXPCOPILOT_API_KEY", "k", 1);
  CHECK_NOTHROW(make_backend(b));
  unsetenv("EXPCOPILOT_API_KEY");
}

TEST_CASE("exit codes") {
  CHECK(exit_code_for(ConfigError("x")) == 2);
  CHECK(exit_code_for(BudgetError("x")) == 2);
  CHECK(exit_code_for(BackendError("x")) == 3);
  CHECK(exit_code_for(ParseError("x")) == 4);
  CHECK(exit_code_for(Error("x")) == 1);
}

TEST_CASE("ingest, elicit and suggest through the binary") {
  const fs::path dir = fresh_dir("flow");
  const fs::path config = write_config(dir);

  auto r = run_cli(dir, "ingest " + cfg_arg(config));
  REQUIRE_MESSAGE(r.code == 0, r.err);
  for (const char* f : {"space.json", "tasks.jsonl", "pool.jsonl", "discretizers.json", "embeddings.jsonl"})
    CHECK(fs::exists(dir / "pools" / f));
  const std::string pool_first = testsupport::slurp(dir / "pools" / "pool.jsonl");
  const std::string disc_first = testsupport::slurp(dir / "pools" / "discretizers.json");
  REQUIRE(run_cli(dir, "ingest " + cfg_arg(config)).code == 0);
  CHECK(testsupport::slurp(dir / "pools" / "pool.jsonl") == pool_first);
  CHECK(testsupport::slurp(dir / "pools" / "discretizers.json") == disc_first);
  CHECK(pool_first == testsupport::slurp(testsupport::kGolden / "synthetic_pool.jsonl"));
  CHECK(std::count(pool_first.begin(), pool_first.end(), '\n') == 36);

  r = run_cli(dir, "elicit " + cfg_arg(config));
  REQUIRE_MESSAGE(r.code == 0, r.err);
  const std::string knowledge = testsupport::slurp(dir / "pools" / "knowledge.jsonl");
  const std::string trace = testsupport::slurp(dir / "pools" / "synthetic-svm.trace.jsonl");
  CHECK(std::count(knowledge.begin(), knowledge.end(), '\n') == 1);
  REQUIRE(run_cli(dir, "elicit " + cfg_arg(config)).code == 0);
  CHECK(testsupport::slurp(dir / "pools" / "knowledge.jsonl") == knowledge);
  CHECK(testsupport::slurp(dir / "pools" / "synthetic-svm.trace.jsonl") == trace);

  const fs::path task = dir / "task.json";
  std::ofstream(task) << json{{"task_id", "fresh"}, {"description", testsupport::synthetic().task("synth_05").description}}.dump();
  r = run_cli(dir, "suggest " + cfg_arg(config) + " --task-file \"" + task.string() + "\" --show-prompt");
  REQUIRE_MESSAGE(r.code == 0, r.err);
  std::istringstream lines(r.out);
  std::string line;
  int n = 0;
  while (std::getline(lines, line)) {
    const auto j = json::parse(line);
    CHECK(j["task_id"] == "fresh");
    CHECK(j["rank"] == ++n);
    CHECK(j["values"].contains("kernel"));
    CHECK(j["levels"].contains("cost"));
  }
  CHECK(n == 3);
  CHECK(r.err.find("Guidelines:") != std::string::npos);
  CHECK(r.err.find("Dataset: " + testsupport::synthetic().task("synth_05").description) != std::string::npos);

  r = run_cli(dir, "suggest " + cfg_arg(config) + " --task \"A new dataset of sensor readings.\" --n 2");
  REQUIRE_MESSAGE(r.code == 0, r.err);
  CHECK(std::count(r.out.begin(), r.out.end(), '\n') == 2);
  CHECK(r.out.find("\"task_id\":\"query\"") != std::string::npos);
}

TEST_CASE("eval through the binary") {
  const fs::path dir = fresh_dir("eval");
  const fs::path config = write_config(dir);
  const auto r = run_cli(dir, "eval " + cfg_arg(config) + " --methods random,constant --seeds 0,1");
  REQUIRE_MESSAGE(r.code == 0, r.err);
  const std::string csv = testsupport::slurp(dir / "out" / "report.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 2 * 2 * 12);
  CHECK(fs::exists(dir / "out" / "report.json"));

  fs::rename(dir / "out" / "report.csv", dir / "first.csv");
  REQUIRE(run_cli(dir, "eval " + cfg_arg(config) + " --methods random,constant --seeds 0,1").code == 0);
  CHECK(testsupport::slurp(dir / "out" / "report.csv") == csv);
}

TEST_CASE("failures map to exit codes") {
  const fs::path dir = fresh_dir("errors");
  const fs::path config = write_config(dir);
  CHECK(run_cli(dir, "suggest " + cfg_arg(config) + " --task x").code == 2);  // no pool yet
  CHECK(run_cli(dir, "ingest " + cfg_arg(config) + " --backend magic").code == 2);
  CHECK(run_cli(dir, "ingest " + cfg_arg(config) + " --unknown-flag").code == 2);
  CHECK(run_cli(dir, "ingest " + cfg_arg(config) + " --backend replay --cassette \"" + (dir / "none.jsonl").string() +
                         "\"")
            .code == 2);

  const fs::path bad = dir / "bad.json";
  std::ofstream(bad) << R"({"backend": {"kind": "scripted", "api_key": "sk-1"}})";
  const auto r = run_cli(dir, "ingest " + cfg_arg(bad));
  CHECK(r.code == 2);
  CHECK(r.err.find("EXPCOPILOT_API_KEY") != std::string::npos);

  REQUIRE(run_cli(dir, "ingest " + cfg_arg(config)).code == 0);
  // An empty cassette misses every call.
  std::ofstream(dir / "empty.jsonl") << "";
  CHECK(run_cli(dir, "suggest " + cfg_arg(config) + " --task x --backend replay --cassette \"" +
                         (dir / "empty.jsonl").string() + "\"")
            .code == 3);
  CHECK(run_cli(dir, "suggest " + cfg_arg(config) + " --task x --budget 256 --n 3").code == 0);
  CHECK(run_cli(dir, "suggest " + cfg_arg(config) + " --task \"" + std::string(1200, 'w') + "\" --budget 256").code ==
        2);

  // A recorded answer that no longer parses, with no benchmark for a fallback.
  const fs::path nobench = dir / "nobench";
  fs::create_directories(nobench);
  const fs::path plain = write_config(nobench, {{"paths", {{"benchmark", nullptr}}}});
  REQUIRE(run_cli(nobench, "ingest " + cfg_arg(config) + " --pools \"" + (nobench / "pools").string() + "\"").code == 0);
  const fs::path cassette = nobench / "cassette.jsonl";
  REQUIRE(run_cli(nobench, "suggest " + cfg_arg(plain) + " --task x --record \"" + cassette.string() + "\"").code == 0);
  std::istringstream recorded(testsupport::slurp(cassette));
  std::ofstream edited(nobench / "edited.jsonl");
  for (std::string l; std::getline(recorded, l);) {
    auto j = json::parse(l);
    if (j["request"]["kind"] == "complete") j["response"]["text"] = "no configurations here";
    edited << j.dump() << "\n";
  }
  edited.close();
  CHECK(run_cli(nobench, "suggest " + cfg_arg(plain) + " --task x --backend replay --cassette \"" +
                             (nobench / "edited.jsonl").string() + "\"")
            .code == 4);
}
