#include "expcopilot/elicitation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "expcopilot/error.hpp"
#include "expcopilot/rng.hpp"
#include "expcopilot/suggestion.hpp"

namespace expcopilot {

void ElicitationConfig::validate() const {
  if (rounds < 1) throw ConfigError("elicitation: rounds must be >= 1");
  if (patience < 1) throw ConfigError("elicitation: patience must be >= 1");
  if (questions.empty()) throw ConfigError("elicitation: questions must be non-empty");
  if (subset_size < 1) throw ConfigError("elicitation: subset_size must be >= 1");
  if (demos_per_task < 1) throw ConfigError("elicitation: demos_per_task must be >= 1");
  if (!(val_fraction > 0.0 && val_fraction < 1.0))
    throw ConfigError("elicitation: val_fraction must be in (0, 1)");
}

ValidationSplit split_validation(std::span<const std::string> task_ids, double val_fraction,
                                 std::uint64_t seed) {
  if (task_ids.size() < 2) throw ConfigError("validation split needs at least 2 tasks");
  if (!(val_fraction > 0.0 && val_fraction < 1.0))
    throw ConfigError("validation split: val_fraction must be in (0, 1)");
  // The epsilon absorbs products like 0.1 * 30 = 3.0000000000000004.
  auto n_val = static_cast<std::size_t>(std::ceil(val_fraction * static_cast<double>(task_ids.size()) - 1e-9));
  n_val = std::clamp<std::size_t>(n_val, 1, task_ids.size() - 1);

  Rng rng = Rng::stream(seed, "validation-split");
  std::set<std::size_t> picked;
  for (std::size_t i : rng.sample_indices(task_ids.size(), n_val)) picked.insert(i);
  ValidationSplit split;
  for (std::size_t i = 0; i < task_ids.size(); ++i)
    (picked.count(i) ? split.validation : split.train).push_back(task_ids[i]);
  return split;
}

ExperiencePool filter_pool(const ExperiencePool& pool, const std::set<std::string>& keep) {
  std::vector<PoolEntry> entries;
  for (const auto& e : pool.entries())
    if (keep.count(e.task.task_id)) entries.push_back(e);
  return ExperiencePool(std::move(entries));
}

double validate_candidate(const KnowledgeItem& candidate, const ValidationContext& ctx, Backend& backend) {
  if (normalize_text(candidate.text).empty()) throw Error("knowledge candidate is empty");
  if (ctx.validation_tasks.empty()) throw ConfigError("no validation tasks");
  SuggestionConfig cfg = ctx.suggestion;
  cfg.temperature = 0.0;
  const std::vector<KnowledgeItem> knowledge{candidate};
  const SuggestionContext sctx{ctx.space, ctx.discretizers, ctx.pool, knowledge, ctx.fallback};

  double total = 0.0;
  for (const auto& id : ctx.validation_tasks) {
    try {
      const Task& task = ctx.benchmark.task(id);
      const SuggestionSet set = suggest(task, sctx, cfg, backend);
      const double raw = evaluate_solution(ctx.benchmark, id, set.solutions.front().concrete);
      total += normalize_accuracy(raw, id, ctx.benchmark);
    } catch (const Error&) {
      // worst normalized score
    }
  }
  return total / static_cast<double>(ctx.validation_tasks.size());
}

ElicitationResult elicit_knowledge(const ExperiencePool& pool, const SolutionSpace& space,
                                   const ElicitationConfig& cfg, Backend& backend,
                                   const CandidateScorer& score) {
  cfg.validate();
  std::vector<std::size_t> eligible;
  for (std::size_t i = 0; i < pool.size(); ++i)
    if (pool.entries()[i].task.space_id == space.id() && !pool.entries()[i].best.empty()) eligible.push_back(i);
  if (eligible.empty()) throw ConfigError("elicitation: experience pool is empty for space '" + space.id() + "'");

  Rng rng = Rng::stream(cfg.seed, "elicit");
  ElicitationResult result;
  double best_score = -std::numeric_limits<double>::infinity();
  bool have_best = false;
  int stagnation = 0;

  for (int round = 1; round <= cfg.rounds; ++round) {
    RoundTrace tr;
    tr.round = round;
    std::vector<Demonstration> groups;
    for (std::size_t k : rng.sample_indices(eligible.size(), cfg.subset_size)) {
      const PoolEntry& e = pool.entries()[eligible[k]];
      tr.sampled_tasks.push_back(e.task.task_id);
      groups.push_back(make_demonstration(e, cfg.demos_per_task));
    }
    tr.question = cfg.questions[rng.below(cfg.questions.size())];
    tr.temperature = rng.uniform01();

    try {
      const std::string prompt = build_elicitation_prompt(space, groups, tr.question);
      ++result.generation_calls;
      tr.candidate = backend.complete({prompt, tr.temperature});
      if (normalize_text(tr.candidate).empty()) throw BackendError("empty knowledge candidate");
      KnowledgeItem item{space.id(), tr.candidate, 0.0, {tr.question, tr.temperature, round}};
      tr.score = score(item);
      item.validation_score = *tr.score;
      if (*tr.score > best_score) {
        best_score = *tr.score;
        result.best = std::move(item);
        have_best = true;
        tr.improved = true;
      }
    } catch (const Error& e) {
      tr.error = e.what();
    }

    const bool improved = tr.improved;
    result.trace.push_back(std::move(tr));
    if (improved) {
      stagnation = 0;
    } else if (++stagnation > cfg.patience) {
      result.stopped_early = round < cfg.rounds;
      break;
    }
  }

  if (!have_best) throw ElicitationError("elicitation failed in every round", std::move(result.trace));
  return result;
}

ElicitationResult elicit_knowledge(const ValidationContext& ctx, const ElicitationConfig& cfg,
                                   Backend& backend) {
  return elicit_knowledge(ctx.pool, ctx.space, cfg, backend, [&](const KnowledgeItem& k) {
    return validate_candidate(k, ctx, backend);
  });
}

}  // namespace expcopilot
