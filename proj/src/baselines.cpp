#include "expcopilot/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "expcopilot/error.hpp"
#include "expcopilot/kernels.hpp"
#include "expcopilot/rng.hpp"

namespace expcopilot {

std::vector<Solution> baseline_random(const Benchmark& b, std::string_view task_id, std::size_t n,
                                      std::uint64_t seed) {
  const std::size_t t = b.task_index(task_id);
  std::vector<std::size_t> available;
  for (std::size_t g = 0; g < b.grid().size(); ++g)
    if (b.lookup(t, g)) available.push_back(g);
  Rng rng = Rng::stream(seed, "baseline-random");
  std::vector<Solution> out;
  for (std::size_t i : rng.sample_indices(available.size(), n)) out.push_back(b.grid()[available[i]]);
  return out;
}

std::vector<double> normalized_matrix(const Benchmark& b, std::span<const std::string> task_ids) {
  const std::size_t cols = b.grid().size();
  std::vector<double> m(task_ids.size() * cols);
  for (std::size_t r = 0; r < task_ids.size(); ++r) {
    const std::size_t t = b.task_index(task_ids[r]);
    for (std::size_t g = 0; g < cols; ++g) {
      const auto v = b.lookup(t, g);
      const double raw = v ? *v : evaluate_solution(b, task_ids[r], b.grid()[g]);
      m[r * cols + g] = normalize_accuracy(raw, task_ids[r], b);
    }
  }
  return m;
}

std::vector<Solution> baseline_constant(const Benchmark& b, std::span<const std::string> train_tasks,
                                        std::size_t n) {
  if (train_tasks.empty()) throw Error("constant baseline needs at least one training task");
  const std::size_t cols = b.grid().size();
  const std::vector<double> m = normalized_matrix(b, train_tasks);
  const kernels::MatrixView view{m, train_tasks.size(), cols};

  std::vector<double> incumbent(train_tasks.size(), -std::numeric_limits<double>::infinity());
  std::vector<double> score(cols);
  std::vector<bool> taken(cols, false);
  std::vector<Solution> out;
  while (out.size() < n && out.size() < cols) {
    if (out.empty())
      kernels::parallel::column_means(view, score);
    else
      kernels::parallel::portfolio_scores(view, incumbent, score);
    std::size_t best = cols;
    for (std::size_t g = 0; g < cols; ++g)
      if (!taken[g] && (best == cols || score[g] > score[best])) best = g;
    taken[best] = true;
    out.push_back(b.grid()[best]);
    for (std::size_t r = 0; r < train_tasks.size(); ++r) incumbent[r] = std::max(incumbent[r], view.at(r, best));
  }
  return out;
}

std::vector<Solution> baseline_nearest_task(const Benchmark& b, std::span<const std::string> train_tasks,
                                            std::string_view query_task, std::size_t n) {
  if (train_tasks.empty()) throw Error("nearest-task baseline needs training tasks");
  auto features = [&](std::string_view id) -> const std::vector<double>& {
    const Task& t = b.task(id);
    if (!t.meta_features) throw Error("task '" + t.task_id + "' has no meta-features");
    return *t.meta_features;
  };
  const auto& q = features(query_task);
  const std::size_t dim = q.size();

  std::vector<double> mean(dim, 0.0), scale(dim, 0.0);
  for (const auto& id : train_tasks) {
    const auto& f = features(id);
    if (f.size() != dim) throw Error("meta-feature dimension mismatch for '" + id + "'");
    for (std::size_t d = 0; d < dim; ++d) mean[d] += f[d];
  }
  for (double& x : mean) x /= static_cast<double>(train_tasks.size());
  for (const auto& id : train_tasks) {
    const auto& f = features(id);
    for (std::size_t d = 0; d < dim; ++d) scale[d] += (f[d] - mean[d]) * (f[d] - mean[d]);
  }
  for (double& s : scale) {
    s = std::sqrt(s / static_cast<double>(train_tasks.size()));
    if (s == 0.0) s = 1.0;  // constant feature: raw difference
  }

  std::vector<std::pair<double, std::string>> order;
  for (const auto& id : train_tasks) {
    const auto& f = features(id);
    double d2 = 0.0;
    for (std::size_t d = 0; d < dim; ++d) {
      const double z = (f[d] - q[d]) / scale[d];
      d2 += z * z;
    }
    order.emplace_back(d2, id);
  }
  std::sort(order.begin(), order.end());

  std::vector<Solution> out;
  std::vector<bool> used(b.grid().size(), false);
  for (const auto& [_, id] : order) {
    const std::size_t t = b.task_index(id);
    std::vector<std::size_t> gs;
    for (std::size_t g = 0; g < b.grid().size(); ++g)
      if (b.lookup(t, g)) gs.push_back(g);
    std::stable_sort(gs.begin(), gs.end(), [&](std::size_t x, std::size_t y) {
      return is_better(b.direction(), *b.lookup(t, x), *b.lookup(t, y));
    });
    for (std::size_t g : gs) {
      if (out.size() >= n) return out;
      if (used[g]) continue;
      used[g] = true;
      out.push_back(b.grid()[g]);
    }
  }
  return out;
}

}  // namespace expcopilot
