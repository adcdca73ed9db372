// expcopilot {ingest|elicit|suggest|eval} --config path [overrides]

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "expcopilot/config.hpp"
#include "expcopilot/error.hpp"

using namespace expcopilot;

namespace {

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> backend;
  std::optional<std::string> cassette;
  std::optional<std::string> record;
  std::optional<std::string> pools;
  std::optional<std::string> benchmark;
  std::optional<std::string> output;
  // suggest
  std::optional<std::string> task_file;
  std::optional<std::string> task_text;
  std::optional<std::string> space;
  std::optional<std::size_t> n;
  std::optional<std::size_t> budget;
  bool show_prompt = false;
  // elicit
  std::optional<int> rounds;
  std::optional<int> patience;
  // eval
  std::vector<std::string> methods;
  std::vector<std::uint64_t> seeds;
  bool elicit = false;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "JSON config file")->required()->check(CLI::ExistingFile);
  cmd->add_option("--seed", o.seed, "root seed");
  cmd->add_option("--backend", o.backend, "scripted, http or replay");
  cmd->add_option("--cassette", o.cassette, "cassette for the replay backend");
  cmd->add_option("--record", o.record, "append every backend call to this cassette");
  cmd->add_option("--pools", o.pools, "pool directory");
  cmd->add_option("--benchmark", o.benchmark, "benchmark bundle directory");
  cmd->add_option("--out", o.output, "output directory");
}

AppConfig resolve(const Overrides& o) {
  AppConfig cfg = load_config(o.config);
  if (o.seed) cfg.seed = *o.seed;
  if (o.backend) cfg.backend.kind = parse_backend_kind(*o.backend);
  if (o.cassette) cfg.backend.cassette = *o.cassette;
  if (o.record) cfg.backend.record = *o.record;
  if (o.pools) cfg.pools = *o.pools;
  if (o.benchmark) cfg.benchmark = *o.benchmark;
  if (o.output) cfg.output = *o.output;
  if (o.n) cfg.suggestion.n_suggestions = *o.n;
  if (o.budget) cfg.suggestion.token_budget = *o.budget;
  if (o.rounds) cfg.elicitation.rounds = *o.rounds;
  if (o.patience) cfg.elicitation.patience = *o.patience;
  if (!o.methods.empty()) {
    cfg.methods.clear();
    for (const auto& m : o.methods) cfg.methods.push_back(parse_method(m));
  }
  if (!o.seeds.empty()) cfg.seeds = o.seeds;
  if (o.elicit) cfg.eval_elicit = true;
  cfg.suggestion.validate();
  cfg.elicitation.validate();
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Experience-and-knowledge retrieval for hyper-parameter suggestion"};
  app.require_subcommand(1);
  Overrides o;

  auto* ingest = app.add_subcommand("ingest", "build the experience pool, discretizers and embeddings");
  add_common(ingest, o);

  auto* elicit = app.add_subcommand("elicit", "elicit and validate knowledge from the pool");
  add_common(elicit, o);
  elicit->add_option("--rounds", o.rounds, "maximum rounds");
  elicit->add_option("--patience", o.patience, "stagnation patience");

  auto* suggest = app.add_subcommand("suggest", "suggest solutions for a new task");
  add_common(suggest, o);
  auto* task_file = suggest->add_option("--task-file", o.task_file, "JSON file with the task description")
                        ->check(CLI::ExistingFile);
  suggest->add_option("--task", o.task_text, "task description")->excludes(task_file);
  suggest->add_option("--space", o.space, "space.json to use (must match the pool)")->check(CLI::ExistingFile);
  suggest->add_option("--n", o.n, "number of suggestions");
  suggest->add_option("--budget", o.budget, "prompt token budget");
  suggest->add_flag("--show-prompt", o.show_prompt, "print the prompt to stderr");

  auto* eval = app.add_subcommand("eval", "leave-one-out evaluation");
  add_common(eval, o);
  eval->add_option("--methods", o.methods, "random,constant,nearest,copilot")->delimiter(',');
  eval->add_option("--seeds", o.seeds, "comma-separated seeds")->delimiter(',');
  eval->add_flag("--elicit", o.elicit, "elicit knowledge in every fold");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    const AppConfig cfg = resolve(o);
    if (ingest->parsed()) {
      auto backend = make_backend(cfg.backend);
      cmd_ingest(cfg, *backend, std::cerr);
    } else if (elicit->parsed()) {
      auto backend = make_backend(cfg.backend);
      cmd_elicit(cfg, *backend, std::cerr);
    } else if (suggest->parsed()) {
      if (!o.task_file && !o.task_text) throw ConfigError("suggest needs --task-file or --task");
      SuggestRequest req;
      if (o.task_file) {
        req.task = load_task_file(*o.task_file, "");
      } else {
        req.task = Task{"query", "", *o.task_text, std::nullopt};
      }
      if (o.space) req.space_override = *o.space;
      req.show_prompt = o.show_prompt;
      auto backend = make_backend(cfg.backend);
      cmd_suggest(cfg, req, *backend, std::cout, std::cerr);
    } else if (eval->parsed()) {
      std::shared_ptr<Backend> backend;
      for (Method m : cfg.methods)
        if (m == Method::copilot) backend = make_backend(cfg.backend);
      cmd_eval(cfg, backend.get(), std::cerr);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  }
  return 0;
}
