#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "expcopilot/space.hpp"

namespace expcopilot {

struct TableRow {
  std::string task_id;
  Solution solution;
  double metric = 0.0;
};

// Lookup-table benchmark: metric of every (task, grid solution) pair plus
// per-task normalization bounds. Immutable after construction.
class Benchmark {
 public:
  Benchmark(std::string name, SolutionSpace space, Direction direction, std::vector<Task> tasks,
            std::vector<TableRow> rows,
            std::map<std::string, std::pair<double, double>> norm_bounds = {},
            std::map<std::string, std::vector<std::string>> twins = {});

  const std::string& name() const { return name_; }
  const SolutionSpace& space() const { return space_; }
  Direction direction() const { return direction_; }
  const std::string& task_kind() const { return task_kind_; }
  void set_task_kind(std::string kind) { task_kind_ = std::move(kind); }

  const std::vector<Task>& tasks() const { return tasks_; }
  const Task& task(std::string_view task_id) const { return tasks_[task_index(task_id)]; }
  std::size_t task_index(std::string_view task_id) const;
  bool has_task(std::string_view task_id) const;

  // Distinct table solutions in solution-key order.
  const std::vector<Solution>& grid() const { return grid_; }
  std::optional<std::size_t> grid_index(const Solution& s) const;
  std::optional<double> lookup(std::size_t task_idx, std::size_t grid_idx) const;

  std::pair<double, double> norm_bounds(std::string_view task_id) const;
  // Batch-size twins (symmetric); empty when none.
  std::vector<std::string> twins_of(std::string_view task_id) const;

  // Table entries of the given tasks as history records, table order.
  std::vector<ExperienceRecord> records(std::span<const std::string> task_ids) const;

  // Snapping support: min-max normalized numeric coordinates (log10 for
  // log-scale parameters, 0 for inactive ones) and categorical signature.
  std::vector<double> coordinates(const Solution& s) const;
  std::string categorical_signature(const Solution& s) const;

 private:
  std::string name_;
  SolutionSpace space_;
  Direction direction_;
  std::string task_kind_ = "classification";
  std::vector<Task> tasks_;
  std::map<std::string, std::size_t> task_pos_;
  std::vector<Solution> grid_;
  std::map<std::string, std::size_t> grid_pos_;  // solution_key -> index
  std::vector<double> grid_coords_;              // grid x numeric params
  std::vector<std::string> grid_signature_;
  std::vector<double> table_;                    // tasks x grid, NaN when absent
  std::vector<std::pair<double, double>> bounds_;
  std::vector<std::size_t> record_order_;        // table row order as task*grid+g
  std::map<std::string, std::vector<std::string>> twins_;
  std::size_t numeric_dims_ = 0;

  friend double evaluate_solution(const Benchmark&, std::string_view, const Solution&);
};

// Reads a bundle directory: space.json, tasks.jsonl, table.jsonl, meta.json
// and optional twins.json.
Benchmark load_benchmark(const std::filesystem::path& dir);

// Exact lookup, or the nearest grid solution (L2 over normalized numerics)
// among table entries of the task with identical categorical values; ties go
// to the smaller solution key.
double evaluate_solution(const Benchmark& b, std::string_view task_id, const Solution& s);

// Best of the first t metrics under `dir`; 1 <= t <= metrics.size().
double metric_at_t(std::span<const double> metrics, std::size_t t, Direction dir);

// Per-task min-max normalization to [0, 100], higher is better.
double normalize_accuracy(double raw, std::string_view task_id, const Benchmark& b);

Direction parse_direction(std::string_view text);
std::string to_string(Direction d);

}  // namespace expcopilot
