#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "expcopilot/benchmark.hpp"
#include "expcopilot/canonical.hpp"
#include "expcopilot/error.hpp"
#include "expcopilot/gateway.hpp"
#include "expcopilot/prompt.hpp"
#include "expcopilot/retrieval.hpp"

namespace expcopilot {

struct ElicitationConfig {
  int rounds = 10;
  int patience = 3;
  std::vector<std::string> questions = default_questions();
  std::size_t subset_size = 5;  // tasks per round
  std::size_t demos_per_task = 3;
  double val_fraction = 0.10;
  std::uint64_t seed = 0;

  void validate() const;
};

struct ValidationSplit {
  std::vector<std::string> train;
  std::vector<std::string> validation;
};

// Seeded uniform sample of ceil(val_fraction * N) validation tasks; the rest
// train. Both lists keep the input order.
ValidationSplit split_validation(std::span<const std::string> task_ids, double val_fraction,
                                 std::uint64_t seed);

// Entries of `pool` whose task is in `keep`.
ExperiencePool filter_pool(const ExperiencePool& pool, const std::set<std::string>& keep);

// What the mock online stage needs to score a knowledge candidate.
struct ValidationContext {
  const SolutionSpace& space;
  const DiscretizerSet& discretizers;
  const ExperiencePool& pool;  // demonstrations; must not contain validation tasks
  const Benchmark& benchmark;
  std::span<const std::string> validation_tasks;
  std::span<const Solution> fallback;
  SuggestionConfig suggestion;
};

// Mean normalized metric@1 over the validation tasks when suggesting with
// {candidate} as the only knowledge at temperature 0. A task whose
// suggestion fails scores 0.
double validate_candidate(const KnowledgeItem& candidate, const ValidationContext& ctx, Backend& backend);

struct RoundTrace {
  int round = 0;
  std::string question;
  double temperature = 0.0;
  std::vector<std::string> sampled_tasks;
  std::string candidate;
  std::optional<double> score;  // empty when generation failed
  std::string error;
  bool improved = false;
};

struct ElicitationResult {
  KnowledgeItem best;
  std::vector<RoundTrace> trace;
  bool stopped_early = false;
  std::size_t generation_calls = 0;
};

using CandidateScorer = std::function<double(const KnowledgeItem&)>;

// The offline loop: sample tasks, a question and a temperature, generate a
// candidate, score it, keep the strictly best, stop once the number of
// consecutive non-improving rounds exceeds the patience.
ElicitationResult elicit_knowledge(const ExperiencePool& pool, const SolutionSpace& space,
                                   const ElicitationConfig& cfg, Backend& backend,
                                   const CandidateScorer& score);

// Same loop scored by validate_candidate on ctx.
ElicitationResult elicit_knowledge(const ValidationContext& ctx, const ElicitationConfig& cfg,
                                   Backend& backend);

class ElicitationError : public Error {
 public:
  ElicitationError(const std::string& what, std::vector<RoundTrace> trace)
      : Error(what), trace_(std::move(trace)) {}
  const std::vector<RoundTrace>& trace() const { return trace_; }

 private:
  std::vector<RoundTrace> trace_;
};

}  // namespace expcopilot
