#include "expcopilot/suggestion.hpp"

#include <algorithm>

#include "expcopilot/error.hpp"
#include "expcopilot/parse.hpp"

namespace expcopilot {

Solution concretize(const DiscreteSolution& d, const SolutionSpace& space,
                    const DiscretizerSet& discretizers) {
  std::map<std::string, Value> values;
  for (const auto& p : space.parameters()) {
    if (!space.is_active(p, d)) continue;
    auto it = d.find(p.name);
    if (it == d.end()) throw Error("concretize: missing parameter '" + p.name + "'");
    if (p.is_numeric()) {
      auto disc = discretizers.find(p.name);
      if (disc == discretizers.end()) throw Error("concretize: no discretizer for '" + p.name + "'");
      values.emplace(p.name, std::clamp(disc->second.representative(it->second), p.lo, p.hi));
    } else {
      values.emplace(p.name, it->second);
    }
  }
  return Solution::make(space, std::move(values));
}

namespace {

void absorb(const ScanResult& scan, const SuggestionContext& ctx, SuggestionSource source,
            std::size_t want, std::vector<SuggestedSolution>& out) {
  for (const auto& d : scan.solutions) {
    if (out.size() >= want) return;
    try {
      out.push_back({d, concretize(d, ctx.space, ctx.discretizers), source});
    } catch (const Error&) {
      // A configuration that cannot be concretized counts as unparsed.
    }
  }
}

}  // namespace

SuggestionSet suggest(const Task& task, const SuggestionContext& ctx, const SuggestionConfig& cfg,
                      Backend& backend, const std::set<std::string>& exclude) {
  cfg.validate();
  if (task.space_id != ctx.space.id())
    throw ConfigError("task '" + task.task_id + "' belongs to space '" + task.space_id + "', not '" +
                      ctx.space.id() + "'");

  SuggestionSet set;
  set.task_id = task.task_id;

  std::vector<Demonstration> demos;
  if (!ctx.pool.empty()) {
    std::set<std::string> skip = exclude;
    skip.insert(task.task_id);
    const EmbeddingVector query = backend.embed(task.description);
    const std::size_t k = cfg.k_tasks.value_or(ctx.pool.size());
    for (const auto& hit : ctx.pool.retrieve(query, k, skip)) {
      const PoolEntry& e = ctx.pool.entries()[hit.index];
      if (e.best.empty()) continue;
      demos.push_back(make_demonstration(e, cfg.demos_per_task));
      set.demonstrated_tasks.push_back(e.task.task_id);
    }
  }
  const auto knowledge = retrieve_knowledge(ctx.space.id(), ctx.knowledge);

  SuggestionPrompt prompt = build_suggestion_prompt(ctx.space, task, demos, knowledge, cfg);
  set.prompt = std::move(prompt.text);
  set.demonstrated_tasks.resize(prompt.demonstrations);

  CompletionRequest req{set.prompt, cfg.temperature, cfg.max_tokens};
  set.raw_response = backend.complete(req);
  ++set.primary_calls;
  absorb(scan_configurations(set.raw_response, ctx.space), ctx, SuggestionSource::primary,
         cfg.n_suggestions, set.solutions);

  if (set.solutions.size() < cfg.n_suggestions) {
    req.temperature = cfg.repair_temperature;
    try {
      set.repair_response = backend.complete(req);
      absorb(scan_configurations(*set.repair_response, ctx.space), ctx, SuggestionSource::repair,
             cfg.n_suggestions, set.solutions);
    } catch (const BackendError&) {
      // The repair attempt is optional; the fallback below covers it.
    }
    ++set.repair_calls;
  }

  if (set.solutions.size() < cfg.n_suggestions) {
    auto fill = [&](bool allow_duplicates) {
      for (const auto& s : ctx.fallback) {
        if (set.solutions.size() >= cfg.n_suggestions) return;
        const bool dup = std::any_of(set.solutions.begin(), set.solutions.end(),
                                     [&](const SuggestedSolution& x) { return x.concrete == s; });
        if (dup && !allow_duplicates) continue;
        set.solutions.push_back(
            {discretize_solution(s, ctx.space, ctx.discretizers), s, SuggestionSource::fallback});
        ++set.fallback_fills;
      }
    };
    fill(false);
    fill(true);
  }

  if (set.solutions.size() < cfg.n_suggestions)
    throw ParseError("task '" + task.task_id + "': only " + std::to_string(set.solutions.size()) + " of " +
                     std::to_string(cfg.n_suggestions) +
                     " configurations could be parsed and no fallback is available");
  return set;
}

}  // namespace expcopilot
