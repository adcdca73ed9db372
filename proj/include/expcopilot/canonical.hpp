#pragma once

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "expcopilot/discretizer.hpp"
#include "expcopilot/space.hpp"

namespace expcopilot {

// Discretizers of one space, keyed by numeric parameter name.
using DiscretizerSet = std::map<std::string, Discretizer>;

// A historical record rendered as natural language.
struct CanonicalExperience {
  std::string task_id;
  std::string space_id;
  std::string solution_text;
  DiscreteSolution discrete_solution;
  double metric = 0.0;
};

DiscreteSolution discretize_solution(const Solution& s, const SolutionSpace& space,
                                     const DiscretizerSet& discretizers);

// "<name> is <level-or-choice>." per present parameter, space order, joined
// by single spaces. Numeric levels use the space's lexicon aliases.
std::string verbalize_solution(const DiscreteSolution& d, const SolutionSpace& space);
std::string verbalize_solution(const Solution& s, const SolutionSpace& space,
                               const DiscretizerSet& discretizers);

CanonicalExperience canonicalize(const ExperienceRecord& record, const SolutionSpace& space,
                                 const DiscretizerSet& discretizers);

// Indices of the n best records of `task_id`, best first. Equal metrics keep
// insertion order.
std::vector<std::size_t> best_solutions(std::span<const ExperienceRecord> records,
                                        std::string_view task_id, std::size_t n, Direction dir);

// Fits one discretizer per numeric parameter on the union of the top
// `top_per_task` records of every task. A conditional parameter that never
// appears among the top records is fitted on every record that carries it,
// and gets no discretizer when no record does.
DiscretizerSet fit_discretizers(std::span<const ExperienceRecord> records,
                                const SolutionSpace& space, Direction dir,
                                std::size_t top_per_task = 3, std::size_t n_levels = kNumLevels);

}  // namespace expcopilot
