#include "expcopilot/benchmark.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "expcopilot/error.hpp"
#include "expcopilot/io.hpp"
#include "expcopilot/kernels.hpp"

namespace expcopilot {

Direction parse_direction(std::string_view text) {
  const std::string t = normalize_text(text);
  if (t == "higher_better" || t == "higher" || t == "max") return Direction::higher_better;
  if (t == "lower_better" || t == "lower" || t == "min") return Direction::lower_better;
  throw ConfigError("unknown metric direction '" + std::string(text) + "'");
}

std::string to_string(Direction d) {
  return d == Direction::higher_better ? "higher_better" : "lower_better";
}

Benchmark::Benchmark(std::string name, SolutionSpace space, Direction direction, std::vector<Task> tasks,
                     std::vector<TableRow> rows,
                     std::map<std::string, std::pair<double, double>> norm_bounds,
                     std::map<std::string, std::vector<std::string>> twins)
    : name_(std::move(name)), space_(std::move(space)), direction_(direction), tasks_(std::move(tasks)) {
  if (tasks_.empty()) throw ConfigError("benchmark '" + name_ + "' has no tasks");
  for (std::size_t i = 0; i < tasks_.size(); ++i) {
    tasks_[i].validate();
    if (tasks_[i].space_id != space_.id())
      throw ConfigError("task '" + tasks_[i].task_id + "' is not in space '" + space_.id() + "'");
    if (!task_pos_.emplace(tasks_[i].task_id, i).second)
      throw ConfigError("duplicate task '" + tasks_[i].task_id + "'");
  }

  for (const auto& p : space_.parameters())
    if (p.is_numeric()) ++numeric_dims_;

  // Distinct grid in key order.
  for (const auto& r : rows) {
    if (r.solution.space_id() != space_.id())
      throw ConfigError("table row for '" + r.task_id + "' is not in space '" + space_.id() + "'");
    if (!task_pos_.count(r.task_id)) throw ConfigError("table row references unknown task '" + r.task_id + "'");
    if (!std::isfinite(r.metric)) throw ConfigError("table row for '" + r.task_id + "': non-finite metric");
    if (!grid_pos_.count(solution_key(space_, r.solution))) {
      grid_pos_.emplace(solution_key(space_, r.solution), 0);
      grid_.push_back(r.solution);
    }
  }
  std::sort(grid_.begin(), grid_.end(),
            [&](const Solution& a, const Solution& b) { return solution_key_less(space_, a, b); });
  for (std::size_t g = 0; g < grid_.size(); ++g) {
    grid_pos_[solution_key(space_, grid_[g])] = g;
    const auto c = coordinates(grid_[g]);
    grid_coords_.insert(grid_coords_.end(), c.begin(), c.end());
    grid_signature_.push_back(categorical_signature(grid_[g]));
  }

  const double nan = std::numeric_limits<double>::quiet_NaN();
  table_.assign(tasks_.size() * grid_.size(), nan);
  for (const auto& r : rows) {
    const std::size_t t = task_pos_.at(r.task_id);
    const std::size_t g = grid_pos_.at(solution_key(space_, r.solution));
    double& cell = table_[t * grid_.size() + g];
    if (!std::isnan(cell))
      throw ConfigError("duplicate table entry for task '" + r.task_id + "' and solution " +
                        solution_key(space_, r.solution));
    cell = r.metric;
    record_order_.push_back(t * grid_.size() + g);
  }

  bounds_.resize(tasks_.size());
  for (std::size_t t = 0; t < tasks_.size(); ++t) {
    auto it = norm_bounds.find(tasks_[t].task_id);
    if (it != norm_bounds.end()) {
      bounds_[t] = it->second;
    } else {
      double lo = std::numeric_limits<double>::infinity();
      double hi = -lo;
      for (std::size_t g = 0; g < grid_.size(); ++g) {
        const double v = table_[t * grid_.size() + g];
        if (std::isnan(v)) continue;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      bounds_[t] = {lo, hi};
    }
    if (!(bounds_[t].first < bounds_[t].second))
      throw ConfigError("task '" + tasks_[t].task_id + "' has degenerate normalization bounds");
  }

  for (const auto& [a, list] : twins) {
    for (const auto& b : list) {
      if (!task_pos_.count(a) || !task_pos_.count(b))
        throw ConfigError("twins reference unknown task '" + (task_pos_.count(a) ? b : a) + "'");
      if (a == b) continue;
      auto& fa = twins_[a];
      auto& fb = twins_[b];
      if (std::find(fa.begin(), fa.end(), b) == fa.end()) fa.push_back(b);
      if (std::find(fb.begin(), fb.end(), a) == fb.end()) fb.push_back(a);
    }
  }
  for (auto& [_, list] : twins_) std::sort(list.begin(), list.end());
}

std::size_t Benchmark::task_index(std::string_view task_id) const {
  auto it = task_pos_.find(std::string(task_id));
  if (it == task_pos_.end()) throw Error("unknown task '" + std::string(task_id) + "'");
  return it->second;
}

bool Benchmark::has_task(std::string_view task_id) const { return task_pos_.count(std::string(task_id)) != 0; }

std::optional<std::size_t> Benchmark::grid_index(const Solution& s) const {
  auto it = grid_pos_.find(solution_key(space_, s));
  if (it == grid_pos_.end()) return std::nullopt;
  return it->second;
}

std::optional<double> Benchmark::lookup(std::size_t task_idx, std::size_t grid_idx) const {
  const double v = table_[task_idx * grid_.size() + grid_idx];
  if (std::isnan(v)) return std::nullopt;
  return v;
}

std::pair<double, double> Benchmark::norm_bounds(std::string_view task_id) const {
  return bounds_[task_index(task_id)];
}

std::vector<std::string> Benchmark::twins_of(std::string_view task_id) const {
  auto it = twins_.find(std::string(task_id));
  return it == twins_.end() ? std::vector<std::string>{} : it->second;
}

std::vector<ExperienceRecord> Benchmark::records(std::span<const std::string> task_ids) const {
  std::set<std::size_t> wanted;
  for (const auto& id : task_ids) wanted.insert(task_index(id));
  std::vector<ExperienceRecord> out;
  for (std::size_t cell : record_order_) {
    const std::size_t t = cell / grid_.size();
    if (!wanted.count(t)) continue;
    out.emplace_back(tasks_[t], grid_[cell % grid_.size()], table_[cell]);
  }
  return out;
}

std::vector<double> Benchmark::coordinates(const Solution& s) const {
  std::vector<double> c;
  c.reserve(numeric_dims_);
  for (const auto& p : space_.parameters()) {
    if (!p.is_numeric()) continue;
    if (!s.has(p.name)) {
      c.push_back(0.0);
      continue;
    }
    const double x = s.numeric(p.name);
    if (p.log_scale)
      c.push_back((std::log10(x) - std::log10(p.lo)) / (std::log10(p.hi) - std::log10(p.lo)));
    else
      c.push_back((x - p.lo) / (p.hi - p.lo));
  }
  return c;
}

std::string Benchmark::categorical_signature(const Solution& s) const {
  std::string sig;
  for (const auto& p : space_.parameters()) {
    if (p.is_numeric()) {
      sig += s.has(p.name) ? "+" : "-";
    } else {
      sig += s.has(p.name) ? "=" + s.categorical(p.name) : "-";
    }
    sig += '\x1f';
  }
  return sig;
}

Benchmark load_benchmark(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw ConfigError("benchmark directory not found: " + dir.string());
  SolutionSpace space = io::load_space(dir / "space.json");

  const io::json meta = io::read_json_file(dir / "meta.json");
  const Direction direction = parse_direction(meta.value("direction", "higher_better"));

  std::vector<Task> tasks;
  std::map<std::string, std::pair<double, double>> bounds;
  io::for_each_json_line(dir / "tasks.jsonl", [&](const io::json& j, std::size_t) {
    Task t = io::task_from_json(j);
    if (t.space_id != space.id()) throw Error("task '" + t.task_id + "' is not in space '" + space.id() + "'");
    if (j.contains("norm_bounds")) {
      const auto nb = j.at("norm_bounds").get<std::vector<double>>();
      if (nb.size() != 2) throw Error("norm_bounds needs [y_min, y_max]");
      bounds[t.task_id] = {nb[0], nb[1]};
    }
    if (t.meta_features && !tasks.empty() && tasks.front().meta_features &&
        tasks.front().meta_features->size() != t.meta_features->size())
      throw Error("task '" + t.task_id + "': meta_features dimension differs");
    tasks.push_back(std::move(t));
  });

  std::set<std::string> ids;
  for (const auto& t : tasks) ids.insert(t.task_id);

  std::vector<TableRow> rows;
  io::for_each_json_line(dir / "table.jsonl", [&](const io::json& j, std::size_t) {
    const std::string id = j.at("task_id").get<std::string>();
    if (!ids.count(id)) throw Error("unknown task '" + id + "'");
    const io::json& m = j.at("metric");
    if (!m.is_number() || !std::isfinite(m.get<double>())) throw Error("metric must be a finite number");
    rows.push_back({id, io::solution_from_json(j.at("values"), space), m.get<double>()});
  });

  std::map<std::string, std::vector<std::string>> twins;
  if (fs::exists(dir / "twins.json"))
    twins = io::read_json_file(dir / "twins.json").get<std::map<std::string, std::vector<std::string>>>();

  Benchmark b(meta.value("name", dir.filename().string()), std::move(space), direction, std::move(tasks),
              std::move(rows), std::move(bounds), std::move(twins));
  if (meta.contains("task_kind")) b.set_task_kind(meta.at("task_kind").get<std::string>());
  return b;
}

double evaluate_solution(const Benchmark& b, std::string_view task_id, const Solution& s) {
  const std::size_t t = b.task_index(task_id);
  if (s.space_id() != b.space().id()) throw Error("solution is not in space '" + b.space().id() + "'");
  const std::size_t n = b.grid_.size();
  if (auto g = b.grid_index(s)) {
    if (auto v = b.lookup(t, *g)) return *v;
  }
  const std::string sig = b.categorical_signature(s);
  std::vector<unsigned char> eligible(n, 0);
  bool any = false;
  for (std::size_t g = 0; g < n; ++g) {
    eligible[g] = b.grid_signature_[g] == sig && !std::isnan(b.table_[t * n + g]);
    any = any || eligible[g];
  }
  if (!any) throw Error("off-grid categorical: no table entry of task '" + std::string(task_id) +
                        "' matches " + solution_key(b.space(), s));
  const auto point = b.coordinates(s);
  const auto hit = kernels::parallel::nearest_row(point, {b.grid_coords_, n, b.numeric_dims_}, eligible);
  return b.table_[t * n + hit.index];
}

double metric_at_t(std::span<const double> metrics, std::size_t t, Direction dir) {
  if (t < 1 || t > metrics.size())
    throw Error("metric_at_t: t=" + std::to_string(t) + " outside [1, " + std::to_string(metrics.size()) + "]");
  double best = metrics[0];
  for (std::size_t i = 1; i < t; ++i)
    if (is_better(dir, metrics[i], best)) best = metrics[i];
  return best;
}

double normalize_accuracy(double raw, std::string_view task_id, const Benchmark& b) {
  const auto [lo, hi] = b.norm_bounds(task_id);
  return b.direction() == Direction::higher_better ? 100.0 * (raw - lo) / (hi - lo)
                                                   : 100.0 * (hi - raw) / (hi - lo);
}

}  // namespace expcopilot
