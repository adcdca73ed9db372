#include "expcopilot/canonical.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include "expcopilot/error.hpp"

namespace expcopilot {

DiscreteSolution discretize_solution(const Solution& s, const SolutionSpace& space,
                                     const DiscretizerSet& discretizers) {
  DiscreteSolution out;
  for (const auto& [name, value] : s.values()) {
    const ParameterDef* p = space.find(name);
    if (!p) throw Error("parameter '" + name + "' is not part of space '" + space.id() + "'");
    if (p->is_numeric()) {
      auto it = discretizers.find(name);
      if (it == discretizers.end()) throw Error("no discretizer for parameter '" + name + "'");
      out[name] = it->second.discretize(std::get<double>(value));
    } else {
      out[name] = std::get<std::string>(value);
    }
  }
  return out;
}

std::string verbalize_solution(const DiscreteSolution& d, const SolutionSpace& space) {
  std::string text;
  for (const auto& p : space.parameters()) {
    auto it = d.find(p.name);
    if (it == d.end()) continue;
    if (!text.empty()) text += ' ';
    text += p.name;
    text += " is ";
    text += p.is_numeric() ? space.alias_of(it->second) : it->second;
    text += '.';
  }
  return text;
}

std::string verbalize_solution(const Solution& s, const SolutionSpace& space,
                               const DiscretizerSet& discretizers) {
  return verbalize_solution(discretize_solution(s, space, discretizers), space);
}

CanonicalExperience canonicalize(const ExperienceRecord& record, const SolutionSpace& space,
                                 const DiscretizerSet& discretizers) {
  CanonicalExperience e;
  e.task_id = record.task().task_id;
  e.space_id = record.task().space_id;
  e.discrete_solution = discretize_solution(record.solution(), space, discretizers);
  e.solution_text = verbalize_solution(e.discrete_solution, space);
  e.metric = record.metric();
  return e;
}

std::vector<std::size_t> best_solutions(std::span<const ExperienceRecord> records,
                                        std::string_view task_id, std::size_t n, Direction dir) {
  if (n == 0) throw Error("best_solutions: n must be >= 1");
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < records.size(); ++i)
    if (records[i].task().task_id == task_id) idx.push_back(i);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return is_better(dir, records[a].metric(), records[b].metric());
  });
  if (idx.size() > n) idx.resize(n);
  return idx;
}

DiscretizerSet fit_discretizers(std::span<const ExperienceRecord> records,
                                const SolutionSpace& space, Direction dir,
                                std::size_t top_per_task, std::size_t n_levels) {
  std::vector<std::string> task_order;
  std::set<std::string> seen;
  for (const auto& r : records)
    if (seen.insert(r.task().task_id).second) task_order.push_back(r.task().task_id);

  std::vector<std::size_t> best;
  for (const auto& t : task_order) {
    auto top = best_solutions(records, t, top_per_task, dir);
    best.insert(best.end(), top.begin(), top.end());
  }

  DiscretizerSet out;
  for (const auto& p : space.parameters()) {
    if (!p.is_numeric()) continue;
    std::vector<double> values;
    for (std::size_t i : best)
      if (records[i].solution().has(p.name)) values.push_back(records[i].solution().numeric(p.name));
    if (values.empty())
      for (const auto& r : records)
        if (r.solution().has(p.name)) values.push_back(r.solution().numeric(p.name));
    if (values.empty() && p.active_when) continue;  // never active in the history
    out.emplace(p.name, Discretizer::fit(values, p, n_levels));
  }
  return out;
}

}  // namespace expcopilot
