#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace expcopilot {

// Canonical five-level lexicon for discretized numerics, lowest first.
inline constexpr std::size_t kNumLevels = 5;
inline const std::array<std::string, kNumLevels> kLevelLabels = {"very low", "low", "medium", "high",
                                                                 "very high"};

// Ordinal of a canonical label, or nullopt.
std::optional<std::size_t> level_ordinal(std::string_view canonical_label);

enum class ParamKind { numeric, categorical };

enum class Direction { higher_better, lower_better };

// True when `a` is strictly better than `b` under `dir`.
inline bool is_better(Direction dir, double a, double b) {
  return dir == Direction::higher_better ? a > b : a < b;
}

// Conditional parameter: active only while `parameter` (another categorical
// in the space) takes one of `values`.
struct ActiveCondition {
  std::string parameter;
  std::vector<std::string> values;
};

struct ParameterDef {
  std::string name;
  ParamKind kind = ParamKind::numeric;
  double lo = 0.0;
  double hi = 0.0;
  bool log_scale = false;
  std::vector<std::string> choices;
  std::optional<ActiveCondition> active_when;

  static ParameterDef numeric(std::string name, double lo, double hi, bool log_scale = false);
  static ParameterDef categorical(std::string name, std::vector<std::string> choices);

  bool is_numeric() const { return kind == ParamKind::numeric; }
  bool contains(double x) const { return x >= lo && x <= hi; }
  // Case-insensitive choice lookup; returns the canonical spelling.
  const std::string* find_choice(std::string_view text) const;
};

using Value = std::variant<double, std::string>;

// Discrete view of a solution: numeric parameters hold a canonical level label
// (see kLevelLabels), categorical parameters hold the choice string.
using DiscreteSolution = std::map<std::string, std::string>;

class SolutionSpace {
 public:
  SolutionSpace(std::string space_id, std::string description, std::vector<ParameterDef> parameters,
                std::array<std::string, kNumLevels> level_aliases = kLevelLabels);

  const std::string& id() const { return id_; }
  const std::string& description() const { return description_; }
  const std::vector<ParameterDef>& parameters() const { return parameters_; }
  const std::array<std::string, kNumLevels>& level_aliases() const { return aliases_; }

  const ParameterDef* find(std::string_view name) const;
  // Case-insensitive parameter lookup used by the response parser.
  const ParameterDef* find_normalized(std::string_view normalized_name) const;

  // Space-specific spelling of a canonical level.
  const std::string& alias_of(std::string_view canonical_label) const;
  // Resolves either a canonical label or a space alias (already normalized)
  // to its canonical label.
  std::optional<std::string> canonical_level(std::string_view normalized_text) const;

  // `categorical_of(name)` must return a pointer to the categorical value of
  // `name` in the solution under inspection, or nullptr if absent.
  template <typename Lookup>
  bool is_active_with(const ParameterDef& p, Lookup&& categorical_of) const {
    if (!p.active_when) return true;
    const ParameterDef* parent = find(p.active_when->parameter);
    if (parent && !is_active_with(*parent, categorical_of)) return false;
    const std::string* v = categorical_of(p.active_when->parameter);
    if (!v) return false;
    for (const auto& allowed : p.active_when->values)
      if (allowed == *v) return true;
    return false;
  }

  bool is_active(const ParameterDef& p, const DiscreteSolution& d) const;

 private:
  std::string id_;
  std::string description_;
  std::vector<ParameterDef> parameters_;
  std::array<std::string, kNumLevels> aliases_;
};

// One concrete assignment of every active parameter. Construction validates
// against the space, so no out-of-space Solution can exist.
class Solution {
 public:
  static Solution make(const SolutionSpace& space, std::map<std::string, Value> values);

  const std::string& space_id() const { return space_id_; }
  const std::map<std::string, Value>& values() const { return values_; }
  bool has(const std::string& name) const { return values_.count(name) != 0; }
  double numeric(const std::string& name) const;
  const std::string& categorical(const std::string& name) const;

  friend bool operator==(const Solution&, const Solution&) = default;

 private:
  Solution(std::string space_id, std::map<std::string, Value> values)
      : space_id_(std::move(space_id)), values_(std::move(values)) {}

  std::string space_id_;
  std::map<std::string, Value> values_;
};

// Canonical text key, parameters in space order: "cost=0.5;kernel=radial".
std::string solution_key(const SolutionSpace& space, const Solution& s);

// Strict weak order over solutions of one space: lexicographic over the
// parameter tuple in space order, numerics compared numerically, absent
// (inactive) before present.
bool solution_key_less(const SolutionSpace& space, const Solution& a, const Solution& b);

struct Task {
  std::string task_id;
  std::string space_id;
  std::string description;
  std::optional<std::vector<double>> meta_features;

  void validate() const;
};

class ExperienceRecord {
 public:
  ExperienceRecord(Task task, Solution solution, double metric);

  const Task& task() const { return task_; }
  const Solution& solution() const { return solution_; }
  double metric() const { return metric_; }

 private:
  Task task_;
  Solution solution_;
  double metric_;
};

// Lowercase ASCII, trim, collapse internal whitespace runs to one space.
std::string normalize_text(std::string_view text);

// Shortest round-trip decimal rendering.
std::string format_real(double x);

}  // namespace expcopilot
