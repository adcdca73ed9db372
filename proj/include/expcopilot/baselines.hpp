#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "expcopilot/benchmark.hpp"

namespace expcopilot {

// Uniform draws without replacement from the task's table solutions.
std::vector<Solution> baseline_random(const Benchmark& b, std::string_view task_id, std::size_t n,
                                      std::uint64_t seed);

// Greedy portfolio over the grid: the first pick maximizes mean normalized
// metric over the training tasks, each further pick maximizes the mean of
// the per-task best normalized metric within the portfolio. Ties go to the
// smaller solution key.
std::vector<Solution> baseline_constant(const Benchmark& b, std::span<const std::string> train_tasks,
                                        std::size_t n);

// Nearest training task by L2 over z-scored meta-features (training-set
// statistics); returns its best n solutions, continuing with the next
// nearest task when it has fewer than n.
std::vector<Solution> baseline_nearest_task(const Benchmark& b, std::span<const std::string> train_tasks,
                                            std::string_view query_task, std::size_t n);

// tasks x grid matrix of normalized metrics (snapped evaluation for missing
// cells), row-major.
std::vector<double> normalized_matrix(const Benchmark& b, std::span<const std::string> task_ids);

}  // namespace expcopilot
