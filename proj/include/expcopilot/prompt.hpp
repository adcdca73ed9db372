#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "expcopilot/retrieval.hpp"
#include "expcopilot/space.hpp"

namespace expcopilot {

// Prompt length estimate: ceil(characters / chars_per_token).
std::size_t estimate_tokens(std::string_view text, double chars_per_token = 4.0);

// One demonstrated task: its description and verbalized solutions, best first.
struct Demonstration {
  std::string description;
  std::vector<std::string> solution_texts;
};

Demonstration make_demonstration(const PoolEntry& entry, std::size_t max_solutions);

// Question variants used to vary the tone of elicitation requests.
const std::vector<std::string>& default_questions();

// Space description, one "Dataset:"/"Configuration i:" block per task and the
// question, separated by blank lines.
std::string build_elicitation_prompt(const SolutionSpace& space,
                                     std::span<const Demonstration> groups,
                                     std::string_view question);

struct SuggestionConfig {
  std::size_t n_suggestions = 3;
  std::optional<std::size_t> k_tasks;  // nullopt: as many as the budget allows
  std::size_t demos_per_task = 3;
  std::size_t token_budget = 3000;
  double temperature = 0.0;
  std::string task_kind = "classification";
  // {n} and {kind} are substituted.
  std::string instruction_template = "recommend {n} hyper-parameter configurations for a new {kind} dataset";
  double chars_per_token = 4.0;
  int max_tokens = 512;
  double repair_temperature = 0.7;

  void validate() const;
};

struct SuggestionPrompt {
  std::string text;
  std::size_t demonstrations = 0;  // task blocks that fit the budget
};

// Sections in order: space description, demonstrations (most similar first),
// "Guidelines:" with numbered knowledge sentences, the instruction, and the
// new task. Demonstrations are added while the whole prompt stays within the
// token budget; the least similar ones are dropped first.
SuggestionPrompt build_suggestion_prompt(const SolutionSpace& space, const Task& task,
                                         std::span<const Demonstration> demos,
                                         std::span<const KnowledgeItem> knowledge,
                                         const SuggestionConfig& cfg);

// Individual guideline sentences of a knowledge text with any leading
// numbering or bullets removed.
std::vector<std::string> guideline_sentences(std::string_view knowledge_text);

}  // namespace expcopilot
