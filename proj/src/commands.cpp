#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>

#include "expcopilot/baselines.hpp"
#include "expcopilot/config.hpp"
#include "expcopilot/error.hpp"
#include "expcopilot/io.hpp"
#include "expcopilot/rng.hpp"
#include "expcopilot/suggestion.hpp"

namespace expcopilot {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void check_keys(const json& j, std::string_view where, std::initializer_list<std::string_view> allowed) {
  if (!j.is_object()) throw ConfigError(std::string(where) + " must be an object");
  for (const auto& [key, _] : j.items()) {
    if (key == "api_key")
      throw ConfigError("api_key is not accepted in config files; set EXPCOPILOT_API_KEY");
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw ConfigError("unknown key '" + key + "' in " + std::string(where));
  }
}

fs::path resolve(const fs::path& base, const json& v) {
  fs::path p = v.get<std::string>();
  return p.is_relative() ? base / p : p;
}

void read_suggestion(const json& j, SuggestionConfig& s) {
  check_keys(j, "suggestion",
             {"n_suggestions", "k_tasks", "demos_per_task", "token_budget", "temperature", "task_kind",
              "instruction_template", "chars_per_token", "max_tokens", "repair_temperature"});
  if (j.contains("n_suggestions")) s.n_suggestions = j["n_suggestions"].get<std::size_t>();
  if (j.contains("k_tasks")) {
    if (j["k_tasks"].is_string()) {
      if (j["k_tasks"] != "fill-budget") throw ConfigError("k_tasks must be an integer or \"fill-budget\"");
      s.k_tasks.reset();
    } else {
      s.k_tasks = j["k_tasks"].get<std::size_t>();
    }
  }
  if (j.contains("demos_per_task")) s.demos_per_task = j["demos_per_task"].get<std::size_t>();
  if (j.contains("token_budget")) s.token_budget = j["token_budget"].get<std::size_t>();
  if (j.contains("temperature")) s.temperature = j["temperature"].get<double>();
  if (j.contains("task_kind")) s.task_kind = j["task_kind"].get<std::string>();
  if (j.contains("instruction_template")) s.instruction_template = j["instruction_template"].get<std::string>();
  if (j.contains("chars_per_token")) s.chars_per_token = j["chars_per_token"].get<double>();
  if (j.contains("max_tokens")) s.max_tokens = j["max_tokens"].get<int>();
  if (j.contains("repair_temperature")) s.repair_temperature = j["repair_temperature"].get<double>();
}

void read_elicitation(const json& j, ElicitationConfig& e) {
  check_keys(j, "elicitation",
             {"rounds", "patience", "questions", "subset_size", "demos_per_task", "val_fraction"});
  if (j.contains("rounds")) e.rounds = j["rounds"].get<int>();
  if (j.contains("patience")) e.patience = j["patience"].get<int>();
  if (j.contains("questions")) e.questions = j["questions"].get<std::vector<std::string>>();
  if (j.contains("subset_size")) e.subset_size = j["subset_size"].get<std::size_t>();
  if (j.contains("demos_per_task")) e.demos_per_task = j["demos_per_task"].get<std::size_t>();
  if (j.contains("val_fraction")) e.val_fraction = j["val_fraction"].get<double>();
}

void read_backend(const json& j, const fs::path& base, BackendConfig& b) {
  check_keys(j, "backend",
             {"kind", "endpoint", "model", "embed_model", "max_attempts", "backoff_ms", "timeout_s",
              "max_in_flight", "cassette", "record", "default_response"});
  if (j.contains("kind")) b.kind = parse_backend_kind(j["kind"].get<std::string>());
  if (j.contains("endpoint")) b.http.endpoint = j["endpoint"].get<std::string>();
  if (j.contains("model")) b.http.model = j["model"].get<std::string>();
  if (j.contains("embed_model")) b.http.embed_model = j["embed_model"].get<std::string>();
  if (j.contains("max_attempts")) b.http.max_attempts = j["max_attempts"].get<int>();
  if (j.contains("backoff_ms")) b.http.backoff_base = std::chrono::milliseconds(j["backoff_ms"].get<long>());
  if (j.contains("timeout_s")) b.http.timeout = std::chrono::seconds(j["timeout_s"].get<long>());
  if (j.contains("max_in_flight")) b.http.max_in_flight = j["max_in_flight"].get<std::size_t>();
  if (j.contains("cassette")) b.cassette = resolve(base, j["cassette"]);
  if (j.contains("record")) b.record = resolve(base, j["record"]);
  if (j.contains("default_response")) b.default_response = j["default_response"].get<std::string>();
}

std::vector<std::string> task_ids_of(const ExperiencePool& pool) {
  std::vector<std::string> ids;
  for (const auto& e : pool.entries()) ids.push_back(e.task.task_id);
  return ids;
}

std::string jsonl(const std::vector<json>& lines) {
  std::string out;
  for (const auto& l : lines) out += l.dump() + "\n";
  return out;
}

}  // namespace

BackendKind parse_backend_kind(std::string_view text) {
  if (text == "scripted") return BackendKind::scripted;
  if (text == "http") return BackendKind::http;
  if (text == "replay") return BackendKind::replay;
  throw ConfigError("unknown backend '" + std::string(text) + "' (expected scripted, http or replay)");
}

AppConfig config_from_json(const json& j, const fs::path& base) {
  check_keys(j, "config",
             {"seed", "backend", "paths", "suggestion", "elicitation", "eval", "direction"});
  AppConfig c;
  try {
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("direction")) c.direction = parse_direction(j["direction"].get<std::string>());
    if (j.contains("backend")) read_backend(j["backend"], base, c.backend);
    if (j.contains("paths")) {
      const json& p = j["paths"];
      check_keys(p, "paths", {"benchmark", "space", "tasks", "history", "pools", "knowledge", "output"});
      if (p.contains("benchmark")) c.benchmark = resolve(base, p["benchmark"]);
      if (p.contains("space")) c.space = resolve(base, p["space"]);
      if (p.contains("tasks")) c.tasks = resolve(base, p["tasks"]);
      if (p.contains("history")) c.history = resolve(base, p["history"]);
      c.pools = p.contains("pools") ? resolve(base, p["pools"]) : base / "pools";
      if (p.contains("knowledge")) c.knowledge = resolve(base, p["knowledge"]);
      c.output = p.contains("output") ? resolve(base, p["output"]) : base / "out";
    } else {
      c.pools = base / "pools";
      c.output = base / "out";
    }
    if (j.contains("suggestion")) read_suggestion(j["suggestion"], c.suggestion);
    if (j.contains("elicitation")) read_elicitation(j["elicitation"], c.elicitation);
    if (j.contains("eval")) {
      const json& e = j["eval"];
      check_keys(e, "eval", {"methods", "seeds", "elicit"});
      if (e.contains("methods")) {
        c.methods.clear();
        for (const auto& m : e["methods"]) c.methods.push_back(parse_method(m.get<std::string>()));
      }
      if (e.contains("seeds")) c.seeds = e["seeds"].get<std::vector<std::uint64_t>>();
      if (e.contains("elicit")) c.eval_elicit = e["elicit"].get<bool>();
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  c.suggestion.validate();
  c.elicitation.validate();
  return c;
}

AppConfig load_config(const fs::path& path) {
  const json j = io::read_json_file(path);
  return config_from_json(j, path.has_parent_path() ? path.parent_path() : fs::path("."));
}

std::shared_ptr<Backend> make_backend(const BackendConfig& cfg) {
  std::shared_ptr<Backend> b;
  switch (cfg.kind) {
    case BackendKind::scripted:
      b = std::make_shared<ScriptedBackend>(ScriptedBackend::Options{cfg.default_response});
      break;
    case BackendKind::replay:
      if (cfg.cassette.empty()) throw ConfigError("replay backend needs backend.cassette");
      b = std::make_shared<ReplayBackend>(cfg.cassette);
      break;
    case BackendKind::http: {
      HttpSettings s = cfg.http;
      s.api_key = HttpBackend::api_key_from_env();
      b = std::make_shared<HttpBackend>(std::move(s));
      break;
    }
  }
  if (!cfg.record.empty()) b = std::make_shared<JournalingBackend>(b, cfg.record);
  return b;
}

PoolBundle load_pool_bundle(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw ConfigError("pool directory " + dir.string() + " does not exist; run ingest");
  PoolBundle bundle{io::load_space(dir / "space.json"), io::load_tasks(dir / "tasks.jsonl"), {}, {}};
  bundle.discretizers = io::discretizers_from_json(io::read_json_file(dir / "discretizers.json"));

  std::map<std::string, std::vector<CanonicalExperience>> best;
  io::for_each_json_line(dir / "pool.jsonl", [&](const json& j, std::size_t) {
    CanonicalExperience e = io::experience_from_json(j);
    if (e.space_id != bundle.space.id()) throw ConfigError("experience of another space");
    best[e.task_id].push_back(std::move(e));
  });
  std::map<std::string, EmbeddingVector> emb;
  for (auto& c : io::load_embeddings(dir / "embeddings.jsonl")) emb[c.task_id] = std::move(c.embedding);

  std::vector<PoolEntry> entries;
  for (const auto& t : bundle.tasks) {
    auto it = best.find(t.task_id);
    if (it == best.end()) continue;
    auto e = emb.find(t.task_id);
    if (e == emb.end()) throw ConfigError("embeddings.jsonl has no vector for task '" + t.task_id + "'");
    entries.push_back({t, e->second, std::move(it->second)});
    best.erase(it);
  }
  if (!best.empty()) throw ConfigError("pool.jsonl mentions unknown task '" + best.begin()->first + "'");
  bundle.pool = ExperiencePool(std::move(entries));
  return bundle;
}

void cmd_ingest(const AppConfig& cfg, Backend& backend, std::ostream& log) {
  std::optional<SolutionSpace> space;
  std::vector<Task> tasks;
  std::vector<ExperienceRecord> records;
  Direction dir = cfg.direction;

  if (!cfg.history.empty()) {
    if (cfg.space.empty() || cfg.tasks.empty()) throw ConfigError("history ingest needs paths.space and paths.tasks");
    space = io::load_space(cfg.space);
    tasks = io::load_tasks(cfg.tasks);
    std::map<std::string, Task> by_id;
    for (const auto& t : tasks) by_id.emplace(t.task_id, t);
    records = io::load_history(cfg.history, by_id, *space);
  } else if (!cfg.benchmark.empty()) {
    const Benchmark b = load_benchmark(cfg.benchmark);
    space = b.space();
    tasks = b.tasks();
    dir = b.direction();
    std::vector<std::string> ids;
    for (const auto& t : tasks) ids.push_back(t.task_id);
    records = b.records(ids);
  } else {
    throw ConfigError("ingest needs paths.history (with space and tasks) or paths.benchmark");
  }
  if (records.empty()) throw ConfigError("history is empty");

  std::vector<const Task*> pool_tasks;
  std::set<std::string> seen;
  for (const auto& r : records)
    if (seen.insert(r.task().task_id).second) pool_tasks.push_back(&r.task());

  std::vector<std::string> texts;
  for (const Task* t : pool_tasks) texts.push_back(t->description);
  const auto vectors = embed_all(backend, texts);
  std::map<std::string, EmbeddingVector> embeddings;
  std::vector<json> emb_lines;
  for (std::size_t i = 0; i < pool_tasks.size(); ++i) {
    embeddings.emplace(pool_tasks[i]->task_id, vectors[i]);
    emb_lines.push_back(io::embedding_to_json({pool_tasks[i]->task_id, vectors[i]}));
  }

  const OfflineArtifacts art = build_offline(records, *space, dir, embeddings);
  std::vector<json> pool_lines;
  for (const Task* t : pool_tasks) {
    std::size_t rank = 0;
    for (std::size_t i : best_solutions(records, t->task_id, 3, dir)) {
      json line = io::experience_to_json(canonicalize(records[i], *space, art.discretizers));
      line["rank"] = ++rank;
      line["values"] = io::solution_to_json(records[i].solution());
      pool_lines.push_back(std::move(line));
    }
  }
  std::vector<json> task_lines;
  for (const auto& t : tasks) task_lines.push_back(io::task_to_json(t));

  io::write_text_file(cfg.pools / "space.json", io::space_to_json(*space).dump(2) + "\n");
  io::write_text_file(cfg.pools / "tasks.jsonl", jsonl(task_lines));
  io::write_text_file(cfg.pools / "pool.jsonl", jsonl(pool_lines));
  io::write_text_file(cfg.pools / "discretizers.json",
                      io::discretizers_to_json(space->id(), art.discretizers).dump(2) + "\n");
  io::write_text_file(cfg.pools / "embeddings.jsonl", jsonl(emb_lines));
  log << "ingested " << records.size() << " records of " << pool_tasks.size() << " tasks into "
      << cfg.pools.string() << "\n";
}

ElicitationResult cmd_elicit(const AppConfig& cfg, Backend& backend, std::ostream& log) {
  const PoolBundle bundle = load_pool_bundle(cfg.pools);
  if (bundle.pool.empty()) throw ConfigError("experience pool is empty");
  if (cfg.benchmark.empty()) throw ConfigError("elicit needs paths.benchmark to validate candidates");
  const Benchmark b = load_benchmark(cfg.benchmark);
  if (b.space().id() != bundle.space.id())
    throw ConfigError("benchmark space '" + b.space().id() + "' differs from pool space '" + bundle.space.id() + "'");

  std::vector<std::string> scored;
  for (const auto& id : task_ids_of(bundle.pool))
    if (b.has_task(id)) scored.push_back(id);
  const ValidationSplit split =
      split_validation(scored, cfg.elicitation.val_fraction, Rng::stream(cfg.seed, "elicit/split").next());
  const std::set<std::string> validation(split.validation.begin(), split.validation.end());
  std::set<std::string> train;
  for (const auto& id : task_ids_of(bundle.pool))
    if (!validation.count(id)) train.insert(id);

  const ExperiencePool epool = filter_pool(bundle.pool, train);
  const auto fallback = baseline_constant(b, split.train, cfg.suggestion.n_suggestions);
  SuggestionConfig scfg = cfg.suggestion;
  scfg.task_kind = b.task_kind();
  const ValidationContext ctx{bundle.space, bundle.discretizers, epool, b, split.validation, fallback, scfg};
  ElicitationConfig ecfg = cfg.elicitation;
  ecfg.seed = Rng::stream(cfg.seed, "elicit").next();

  auto write_trace = [&](const std::vector<RoundTrace>& trace) {
    std::vector<json> lines;
    for (const auto& r : trace) {
      json l{{"round", r.round},       {"question", r.question}, {"temperature", r.temperature},
             {"tasks", r.sampled_tasks}, {"candidate", r.candidate}, {"improved", r.improved}};
      l["score"] = r.score ? json(*r.score) : json(nullptr);
      if (!r.error.empty()) l["error"] = r.error;
      lines.push_back(std::move(l));
    }
    io::write_text_file(cfg.pools / (bundle.space.id() + ".trace.jsonl"), jsonl(lines));
  };

  ElicitationResult result;
  try {
    result = elicit_knowledge(ctx, ecfg, backend);
  } catch (const ElicitationError& e) {
    write_trace(e.trace());
    throw BackendError(e.what());
  }
  write_trace(result.trace);

  std::vector<json> lines;
  const fs::path kpath = cfg.knowledge_path();
  if (fs::exists(kpath))
    for (const auto& k : io::load_knowledge(kpath))
      if (k.space_id != bundle.space.id()) lines.push_back(io::knowledge_to_json(k));
  lines.push_back(io::knowledge_to_json(result.best));
  io::write_text_file(kpath, jsonl(lines));
  log << "elicited knowledge for '" << bundle.space.id() << "' in " << result.trace.size()
      << " rounds, validation score " << format_real(result.best.validation_score) << "\n";
  return result;
}

SuggestionSet cmd_suggest(const AppConfig& cfg, const SuggestRequest& req, Backend& backend,
                          std::ostream& out, std::ostream& log) {
  const PoolBundle bundle = load_pool_bundle(cfg.pools);
  SolutionSpace space = bundle.space;
  if (req.space_override) {
    space = io::load_space(*req.space_override);
    if (space.id() != bundle.space.id())
      throw ConfigError("space '" + space.id() + "' has no ingested pool in " + cfg.pools.string());
  }
  std::vector<KnowledgeItem> knowledge;
  if (fs::exists(cfg.knowledge_path())) knowledge = io::load_knowledge(cfg.knowledge_path());

  std::vector<Solution> fallback;
  if (!cfg.benchmark.empty()) {
    const Benchmark b = load_benchmark(cfg.benchmark);
    std::vector<std::string> ids;
    for (const auto& id : task_ids_of(bundle.pool))
      if (b.has_task(id) && id != req.task.task_id) ids.push_back(id);
    if (!ids.empty()) fallback = baseline_constant(b, ids, cfg.suggestion.n_suggestions);
  }

  Task task = req.task;
  if (task.space_id.empty()) task.space_id = space.id();
  const SuggestionContext ctx{space, bundle.discretizers, bundle.pool, knowledge, fallback};
  SuggestionSet set = suggest(task, ctx, cfg.suggestion, backend);
  if (req.show_prompt) log << set.prompt << "\n";

  std::size_t rank = 0;
  for (const auto& s : set.solutions) {
    json line{{"task_id", set.task_id},
              {"rank", ++rank},
              {"source", s.source == SuggestionSource::primary  ? "primary"
                         : s.source == SuggestionSource::repair ? "repair"
                                                                : "fallback"},
              {"values", io::solution_to_json(s.concrete)},
              {"levels", s.discrete}};
    out << line.dump() << "\n";
  }
  return set;
}

EvalReport cmd_eval(const AppConfig& cfg, Backend* backend, std::ostream& log) {
  if (cfg.benchmark.empty()) throw ConfigError("eval needs paths.benchmark");
  const Benchmark b = load_benchmark(cfg.benchmark);
  EvalConfig ecfg;
  ecfg.n_suggestions = cfg.suggestion.n_suggestions;
  ecfg.suggestion = cfg.suggestion;
  ecfg.elicit = cfg.eval_elicit;
  ecfg.elicitation = cfg.elicitation;
  const EvalReport report = run_loo_eval(b, cfg.methods, cfg.seeds, ecfg, backend);

  io::write_text_file(cfg.output / "report.csv", report_csv(report));
  io::write_text_file(cfg.output / "report.json", report_json(report, b));
  for (const auto& s : summarize(report)) {
    log << to_string(s.method) << ": nAcc@1 " << format_real(s.nacc_mean[0]) << " nAcc@3 "
        << format_real(s.nacc_mean[2]);
    if (s.failures) log << " (" << s.failures << " failed)";
    log << "\n";
  }
  for (const auto& v : report.violations)
    log << "warning: prompt for held-out task '" << v.held_out << "' (seed " << v.seed << ") contains '"
        << v.needle << "'\n";
  return report;
}

Task load_task_file(const fs::path& path, const std::string& default_space) {
  const json j = io::read_json_file(path);
  Task t;
  try {
    if (!j.is_object()) throw ConfigError("task file must hold a JSON object");
    t = io::task_from_json(json{{"task_id", j.value("task_id", std::string("query"))},
                                {"space_id", j.value("space_id", default_space)},
                                {"description", j.at("description")},
                                {"meta_features", j.value("meta_features", json(nullptr))}});
  } catch (const json::exception& e) {
    throw LoadError(path.string(), 0, e.what());
  }
  return t;
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const BudgetError*>(&e)) return 2;
  if (dynamic_cast<const BackendError*>(&e)) return 3;
  if (dynamic_cast<const ParseError*>(&e)) return 4;
  return 1;
}

}  // namespace expcopilot
