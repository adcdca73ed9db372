#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "expcopilot/benchmark.hpp"
#include "expcopilot/canonical.hpp"
#include "expcopilot/elicitation.hpp"
#include "expcopilot/gateway.hpp"
#include "expcopilot/prompt.hpp"
#include "expcopilot/retrieval.hpp"

namespace expcopilot {

// Discretizers plus the experience pool built from one set of records.
struct OfflineArtifacts {
  DiscretizerSet discretizers;
  ExperiencePool pool;
};

// Fits discretizers on `records`, canonicalizes them and keeps the
// `best_per_task` best per task. Pool entries follow first appearance of each
// task in `records`; every task needs an entry in `embeddings`.
OfflineArtifacts build_offline(std::span<const ExperienceRecord> records, const SolutionSpace& space,
                               Direction dir, const std::map<std::string, EmbeddingVector>& embeddings,
                               std::size_t best_per_task = 3);

enum class Method { random, constant, nearest, copilot };

std::string to_string(Method m);
Method parse_method(std::string_view text);

struct EvalConfig {
  std::size_t n_suggestions = 3;
  SuggestionConfig suggestion;
  // Per-fold knowledge elicitation for the copilot method; without it the
  // copilot prompts carry demonstrations only.
  bool elicit = false;
  ElicitationConfig elicitation;
  std::size_t embed_parallel = 4;
  // Scan every prompt of a fold for the held-out task and its twins.
  bool audit = true;
};

struct EvalRow {
  Method method = Method::random;
  std::uint64_t seed = 0;
  std::string task_id;
  std::array<double, 3> metric{};  // metric@1..3
  std::array<double, 3> nacc{};    // normalized metric@1..3
  bool failed = false;
  std::string error;
};

struct AuditViolation {
  std::uint64_t seed = 0;
  std::string held_out;
  std::string needle;  // the leaked identifier or description
};

struct EvalReport {
  std::vector<EvalRow> rows;  // method, then seed, then task order
  std::vector<AuditViolation> violations;
  std::size_t prompts_audited = 0;
  std::size_t elicitation_failures = 0;
};

struct MethodSummary {
  Method method = Method::random;
  std::size_t rows = 0;
  std::size_t failures = 0;
  std::array<double, 3> nacc_mean{}, nacc_std{};
  std::array<double, 3> metric_mean{}, metric_std{};
};

// Mean and population standard deviation over every (seed, task) row.
std::vector<MethodSummary> summarize(const EvalReport& report);

// Leave-one-out sweep: for each seed and task, hold the task (and its twins)
// out, build every offline artifact from the remaining tasks, run each
// method for n suggestions and score metric@1..3. `backend` is required for
// the copilot method only. Folds run in parallel; rows are merged in task
// order.
EvalReport run_loo_eval(const Benchmark& b, std::span<const Method> methods,
                        std::span<const std::uint64_t> seeds, const EvalConfig& cfg,
                        Backend* backend = nullptr);

// Columns: method,seed,task_id,metric@1,metric@2,metric@3,nacc@1,nacc@2,nacc@3,failed
std::string report_csv(const EvalReport& report);
std::string report_json(const EvalReport& report, const Benchmark& b);

// Occurrences of the held-out task (and twins) in a prompt, ignoring the
// final "Dataset: <description>" section that introduces the held-out task
// itself. Returns the leaked needles.
std::vector<std::string> audit_prompt(std::string_view prompt, const Task& held_out,
                                      std::span<const Task> twins);

}  // namespace expcopilot
