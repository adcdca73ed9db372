#include "expcopilot/space.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <set>

#include "expcopilot/error.hpp"

namespace expcopilot {

std::optional<std::size_t> level_ordinal(std::string_view canonical_label) {
  for (std::size_t i = 0; i < kNumLevels; ++i)
    if (kLevelLabels[i] == canonical_label) return i;
  return std::nullopt;
}

std::string normalize_text(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (char c : text) {
    const auto uc = static_cast<unsigned char>(c);
    if (std::isspace(uc)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(static_cast<char>(std::tolower(uc)));
  }
  return out;
}

std::string format_real(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

ParameterDef ParameterDef::numeric(std::string name, double lo, double hi, bool log_scale) {
  ParameterDef p;
  p.name = std::move(name);
  p.kind = ParamKind::numeric;
  p.lo = lo;
  p.hi = hi;
  p.log_scale = log_scale;
  return p;
}

ParameterDef ParameterDef::categorical(std::string name, std::vector<std::string> choices) {
  ParameterDef p;
  p.name = std::move(name);
  p.kind = ParamKind::categorical;
  p.choices = std::move(choices);
  return p;
}

const std::string* ParameterDef::find_choice(std::string_view text) const {
  const std::string key = normalize_text(text);
  for (const auto& c : choices)
    if (normalize_text(c) == key) return &c;
  return nullptr;
}

namespace {

bool has_separator(std::string_view s) {
  return s.find(". ") != std::string_view::npos || s.find('\n') != std::string_view::npos;
}

void validate_parameter(const ParameterDef& p, const std::string& space_id) {
  auto fail = [&](const std::string& why) {
    throw ConfigError("space '" + space_id + "': parameter '" + p.name + "': " + why);
  };
  if (p.name.empty()) fail("name must be non-empty");
  if (p.name.front() == ' ' || p.name.back() == ' ') fail("name has surrounding whitespace");
  if (has_separator(p.name) || normalize_text(p.name).find(" is ") != std::string::npos)
    fail("name must not contain '. ' or ' is '");
  if (p.is_numeric()) {
    if (!std::isfinite(p.lo) || !std::isfinite(p.hi) || !(p.lo < p.hi)) fail("requires lo < hi");
    if (p.log_scale && p.lo <= 0.0) fail("log-scale range must be positive");
    if (!p.choices.empty()) fail("numeric parameter cannot have choices");
  } else {
    if (p.choices.empty()) fail("categorical parameter needs choices");
    std::set<std::string> seen;
    for (const auto& c : p.choices) {
      const std::string n = normalize_text(c);
      if (n.empty()) fail("empty choice");
      if (has_separator(c)) fail("choice '" + c + "' contains '. '");
      if (!seen.insert(n).second) fail("duplicate choice '" + c + "'");
    }
  }
}

}  // namespace

SolutionSpace::SolutionSpace(std::string space_id, std::string description,
                             std::vector<ParameterDef> parameters,
                             std::array<std::string, kNumLevels> level_aliases)
    : id_(std::move(space_id)),
      description_(std::move(description)),
      parameters_(std::move(parameters)),
      aliases_(std::move(level_aliases)) {
  if (id_.empty()) throw ConfigError("space id must be non-empty");
  if (normalize_text(description_).empty())
    throw ConfigError("space '" + id_ + "': description must be non-empty");
  if (parameters_.empty()) throw ConfigError("space '" + id_ + "': no parameters");

  std::set<std::string> names;
  for (std::size_t i = 0; i < parameters_.size(); ++i) {
    const auto& p = parameters_[i];
    validate_parameter(p, id_);
    if (!names.insert(normalize_text(p.name)).second)
      throw ConfigError("space '" + id_ + "': duplicate parameter '" + p.name + "'");
    if (p.active_when) {
      const ParameterDef* parent = nullptr;
      for (std::size_t j = 0; j < parameters_.size(); ++j)
        if (j != i && parameters_[j].name == p.active_when->parameter) parent = &parameters_[j];
      if (!parent || parent->is_numeric())
        throw ConfigError("space '" + id_ + "': parameter '" + p.name +
                          "' must depend on another categorical parameter");
      for (const auto& v : p.active_when->values)
        if (std::find(parent->choices.begin(), parent->choices.end(), v) == parent->choices.end())
          throw ConfigError("space '" + id_ + "': condition value '" + v + "' is not a choice of '" +
                            parent->name + "'");
    }
  }

  for (const auto& p : parameters_) {
    const ParameterDef* cur = &p;
    for (std::size_t steps = 0; cur->active_when; ++steps) {
      if (steps >= parameters_.size())
        throw ConfigError("space '" + id_ + "': cyclic conditions involving '" + p.name + "'");
      cur = find(cur->active_when->parameter);
    }
  }

  std::set<std::string> levels;
  for (const auto& a : aliases_) {
    const std::string n = normalize_text(a);
    if (n.empty() || has_separator(a) || !levels.insert(n).second)
      throw ConfigError("space '" + id_ + "': level aliases must be distinct and non-empty");
  }
  // An alias may not spell a different canonical level, otherwise parsing is
  // ambiguous.
  for (std::size_t i = 0; i < kNumLevels; ++i)
    for (std::size_t j = 0; j < kNumLevels; ++j)
      if (i != j && normalize_text(aliases_[i]) == kLevelLabels[j])
        throw ConfigError("space '" + id_ + "': alias '" + aliases_[i] + "' shadows level '" +
                          kLevelLabels[j] + "'");
}

const ParameterDef* SolutionSpace::find(std::string_view name) const {
  for (const auto& p : parameters_)
    if (p.name == name) return &p;
  return nullptr;
}

const ParameterDef* SolutionSpace::find_normalized(std::string_view normalized_name) const {
  for (const auto& p : parameters_)
    if (normalize_text(p.name) == normalized_name) return &p;
  return nullptr;
}

const std::string& SolutionSpace::alias_of(std::string_view canonical_label) const {
  auto ord = level_ordinal(canonical_label);
  if (!ord) throw Error("unknown level label '" + std::string(canonical_label) + "'");
  return aliases_[*ord];
}

std::optional<std::string> SolutionSpace::canonical_level(std::string_view normalized_text) const {
  for (std::size_t i = 0; i < kNumLevels; ++i)
    if (kLevelLabels[i] == normalized_text || normalize_text(aliases_[i]) == normalized_text)
      return kLevelLabels[i];
  return std::nullopt;
}

bool SolutionSpace::is_active(const ParameterDef& p, const DiscreteSolution& d) const {
  return is_active_with(p, [&](const std::string& name) -> const std::string* {
    auto it = d.find(name);
    return it == d.end() ? nullptr : &it->second;
  });
}

Solution Solution::make(const SolutionSpace& space, std::map<std::string, Value> values) {
  auto fail = [&](const std::string& name, const std::string& why) {
    throw OutOfSpaceError("solution for space '" + space.id() + "': parameter '" + name + "' " + why);
  };
  for (const auto& [name, v] : values)
    if (!space.find(name)) fail(name, "is not part of the space");

  auto categorical_of = [&](const std::string& name) -> const std::string* {
    auto it = values.find(name);
    if (it == values.end()) return nullptr;
    return std::get_if<std::string>(&it->second);
  };

  for (const auto& p : space.parameters()) {
    auto it = values.find(p.name);
    const bool active = space.is_active_with(p, categorical_of);
    if (!active) {
      if (it != values.end()) fail(p.name, "is inactive under this configuration");
      continue;
    }
    if (it == values.end()) fail(p.name, "is missing");
    if (p.is_numeric()) {
      const double* x = std::get_if<double>(&it->second);
      if (!x) fail(p.name, "must be numeric");
      if (!std::isfinite(*x) || !p.contains(*x))
        fail(p.name, "value " + format_real(*x) + " outside [" + format_real(p.lo) + ", " +
                         format_real(p.hi) + "]");
    } else {
      const std::string* s = std::get_if<std::string>(&it->second);
      if (!s) fail(p.name, "must be categorical");
      if (std::find(p.choices.begin(), p.choices.end(), *s) == p.choices.end())
        fail(p.name, "value '" + *s + "' is not a valid choice");
    }
  }
  return Solution(space.id(), std::move(values));
}

double Solution::numeric(const std::string& name) const {
  auto it = values_.find(name);
  if (it == values_.end()) throw Error("solution has no parameter '" + name + "'");
  return std::get<double>(it->second);
}

const std::string& Solution::categorical(const std::string& name) const {
  auto it = values_.find(name);
  if (it == values_.end()) throw Error("solution has no parameter '" + name + "'");
  return std::get<std::string>(it->second);
}

std::string solution_key(const SolutionSpace& space, const Solution& s) {
  std::string key;
  for (const auto& p : space.parameters()) {
    auto it = s.values().find(p.name);
    if (it == s.values().end()) continue;
    if (!key.empty()) key += ';';
    key += p.name;
    key += '=';
    if (const double* x = std::get_if<double>(&it->second))
      key += format_real(*x);
    else
      key += std::get<std::string>(it->second);
  }
  return key;
}

bool solution_key_less(const SolutionSpace& space, const Solution& a, const Solution& b) {
  for (const auto& p : space.parameters()) {
    auto ia = a.values().find(p.name);
    auto ib = b.values().find(p.name);
    const bool ha = ia != a.values().end();
    const bool hb = ib != b.values().end();
    if (ha != hb) return !ha;
    if (!ha) continue;
    if (ia->second != ib->second) return ia->second < ib->second;
  }
  return false;
}

void Task::validate() const {
  if (task_id.empty()) throw ConfigError("task id must be non-empty");
  if (normalize_text(description).empty())
    throw ConfigError("task '" + task_id + "': description must be non-empty");
  if (meta_features)
    for (double f : *meta_features)
      if (!std::isfinite(f)) throw ConfigError("task '" + task_id + "': non-finite meta-feature");
}

ExperienceRecord::ExperienceRecord(Task task, Solution solution, double metric)
    : task_(std::move(task)), solution_(std::move(solution)), metric_(metric) {
  if (task_.space_id != solution_.space_id())
    throw ConfigError("record for task '" + task_.task_id + "': space mismatch ('" + task_.space_id +
                      "' vs '" + solution_.space_id() + "')");
  if (!std::isfinite(metric_))
    throw ConfigError("record for task '" + task_.task_id + "': metric must be finite");
}

}  // namespace expcopilot
