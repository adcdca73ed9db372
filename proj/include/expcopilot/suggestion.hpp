#pragma once

#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "expcopilot/canonical.hpp"
#include "expcopilot/gateway.hpp"
#include "expcopilot/prompt.hpp"
#include "expcopilot/retrieval.hpp"

namespace expcopilot {

// Maps levels back to representative values. Inactive parameters present in
// `d` are dropped; the result is clamped into the parameter ranges.
Solution concretize(const DiscreteSolution& d, const SolutionSpace& space,
                    const DiscretizerSet& discretizers);

enum class SuggestionSource { primary, repair, fallback };

struct SuggestedSolution {
  DiscreteSolution discrete;
  Solution concrete;
  SuggestionSource source = SuggestionSource::primary;
};

struct SuggestionSet {
  std::string task_id;
  std::vector<SuggestedSolution> solutions;  // generation order
  std::string prompt;
  std::string raw_response;
  std::optional<std::string> repair_response;
  std::vector<std::string> demonstrated_tasks;
  std::size_t primary_calls = 0;
  std::size_t repair_calls = 0;
  std::size_t fallback_fills = 0;
};

// Offline artifacts the online stage reads from.
struct SuggestionContext {
  const SolutionSpace& space;
  const DiscretizerSet& discretizers;
  const ExperiencePool& pool;
  std::span<const KnowledgeItem> knowledge;
  // Constant-baseline portfolio used to fill slots the LLM left empty.
  std::span<const Solution> fallback;
};

// Retrieve demonstrations and knowledge, prompt once, parse and concretize.
// If fewer than n configurations parse, a single repair call at the repair
// temperature is made and any remaining slots come from the fallback.
SuggestionSet suggest(const Task& task, const SuggestionContext& ctx, const SuggestionConfig& cfg,
                      Backend& backend, const std::set<std::string>& exclude = {});

}  // namespace expcopilot
