#include "expcopilot/io.hpp"

#include <fstream>
#include <sstream>

#include "expcopilot/error.hpp"

namespace expcopilot::io {

namespace {

ParameterDef parameter_from_json(const json& j) {
  const std::string name = j.at("name").get<std::string>();
  const std::string kind = j.at("kind").get<std::string>();
  ParameterDef p;
  if (kind == "numeric") {
    const auto range = j.at("numeric_range").get<std::vector<double>>();
    if (range.size() != 2) throw ConfigError("parameter '" + name + "': numeric_range needs [lo, hi]");
    p = ParameterDef::numeric(name, range[0], range[1], j.value("log_scale", false));
  } else if (kind == "categorical") {
    p = ParameterDef::categorical(name, j.at("choices").get<std::vector<std::string>>());
  } else {
    throw ConfigError("parameter '" + name + "': unknown kind '" + kind + "'");
  }
  if (j.contains("active_when")) {
    const json& c = j.at("active_when");
    p.active_when = ActiveCondition{c.at("parameter").get<std::string>(),
                                    c.at("values").get<std::vector<std::string>>()};
  }
  return p;
}

}  // namespace

SolutionSpace space_from_json(const json& j) {
  try {
    std::vector<ParameterDef> params;
    for (const auto& p : j.at("parameters")) params.push_back(parameter_from_json(p));
    std::array<std::string, kNumLevels> levels = kLevelLabels;
    if (j.contains("levels")) {
      const auto v = j.at("levels").get<std::vector<std::string>>();
      if (v.size() != kNumLevels) throw ConfigError("space: 'levels' must list exactly 5 labels");
      std::copy(v.begin(), v.end(), levels.begin());
    }
    return SolutionSpace(j.at("space_id").get<std::string>(), j.at("description").get<std::string>(),
                         std::move(params), levels);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("space: ") + e.what());
  }
}

json space_to_json(const SolutionSpace& space) {
  json params = json::array();
  for (const auto& p : space.parameters()) {
    json jp{{"name", p.name}, {"kind", p.is_numeric() ? "numeric" : "categorical"}};
    if (p.is_numeric()) {
      jp["numeric_range"] = {p.lo, p.hi};
      jp["log_scale"] = p.log_scale;
    } else {
      jp["choices"] = p.choices;
    }
    if (p.active_when)
      jp["active_when"] = {{"parameter", p.active_when->parameter}, {"values", p.active_when->values}};
    params.push_back(std::move(jp));
  }
  return json{{"space_id", space.id()},
              {"description", space.description()},
              {"levels", space.level_aliases()},
              {"parameters", std::move(params)}};
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw LoadError(path.string(), 0, e.what());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << text;
}

SolutionSpace load_space(const std::filesystem::path& path) {
  try {
    return space_from_json(read_json_file(path));
  } catch (const LoadError&) {
    throw;
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void for_each_json_line(const std::filesystem::path& path,
                        const std::function<void(const json&, std::size_t)>& fn) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      fn(json::parse(line), lineno);
    } catch (const json::exception& e) {
      throw LoadError(path.string(), lineno, e.what());
    } catch (const LoadError&) {
      throw;
    } catch (const Error& e) {
      throw LoadError(path.string(), lineno, e.what());
    }
  }
}

Task task_from_json(const json& j) {
  Task t;
  t.task_id = j.at("task_id").get<std::string>();
  t.space_id = j.at("space_id").get<std::string>();
  t.description = j.at("description").get<std::string>();
  if (j.contains("meta_features") && !j.at("meta_features").is_null())
    t.meta_features = j.at("meta_features").get<std::vector<double>>();
  t.validate();
  return t;
}

json task_to_json(const Task& t) {
  json j{{"task_id", t.task_id}, {"space_id", t.space_id}, {"description", t.description}};
  if (t.meta_features) j["meta_features"] = *t.meta_features;
  return j;
}

std::vector<Task> load_tasks(const std::filesystem::path& path) {
  std::vector<Task> tasks;
  std::map<std::string, std::size_t> seen;
  std::optional<std::size_t> dim;
  for_each_json_line(path, [&](const json& j, std::size_t) {
    Task t = task_from_json(j);
    if (!seen.emplace(t.task_id, tasks.size()).second)
      throw ConfigError("duplicate task id '" + t.task_id + "'");
    if (t.meta_features) {
      if (dim && *dim != t.meta_features->size())
        throw ConfigError("task '" + t.task_id + "': meta_features dimension differs");
      dim = t.meta_features->size();
    }
    tasks.push_back(std::move(t));
  });
  return tasks;
}

Solution solution_from_json(const json& values, const SolutionSpace& space) {
  std::map<std::string, Value> v;
  for (const auto& [name, val] : values.items()) {
    const ParameterDef* p = space.find(name);
    if (!p) throw OutOfSpaceError("parameter '" + name + "' is not part of space '" + space.id() + "'");
    if (p->is_numeric()) {
      if (!val.is_number()) throw OutOfSpaceError("parameter '" + name + "' must be numeric");
      v.emplace(name, val.get<double>());
    } else {
      if (!val.is_string()) throw OutOfSpaceError("parameter '" + name + "' must be a string");
      v.emplace(name, val.get<std::string>());
    }
  }
  return Solution::make(space, std::move(v));
}

json solution_to_json(const Solution& s) {
  json j = json::object();
  for (const auto& [name, v] : s.values()) {
    if (const double* x = std::get_if<double>(&v))
      j[name] = *x;
    else
      j[name] = std::get<std::string>(v);
  }
  return j;
}

namespace {

double finite_metric(const json& j) {
  const json& m = j.at("metric");
  if (!m.is_number()) throw Error("metric must be a finite number");
  const double x = m.get<double>();
  if (!std::isfinite(x)) throw Error("metric must be a finite number");
  return x;
}

}  // namespace

std::vector<ExperienceRecord> load_history(const std::filesystem::path& path,
                                           const std::map<std::string, Task>& tasks,
                                           const SolutionSpace& space) {
  std::vector<ExperienceRecord> out;
  for_each_json_line(path, [&](const json& j, std::size_t) {
    const std::string id = j.at("task_id").get<std::string>();
    auto it = tasks.find(id);
    if (it == tasks.end()) throw Error("unknown task '" + id + "'");
    const double metric = finite_metric(j);
    out.emplace_back(it->second, solution_from_json(j.at("values"), space), metric);
  });
  return out;
}

json discretizers_to_json(const std::string& space_id, const DiscretizerSet& set) {
  json arr = json::array();
  for (const auto& [name, d] : set)
    arr.push_back({{"parameter", name},
                   {"split_points", d.split_points()},
                   {"bin_labels", d.bin_labels()},
                   {"representatives", d.representatives()},
                   {"fitted_in_log", d.fitted_in_log()},
                   {"range", {d.lo(), d.hi()}}});
  return json{{"space_id", space_id}, {"discretizers", std::move(arr)}};
}

DiscretizerSet discretizers_from_json(const json& j) {
  DiscretizerSet out;
  try {
    for (const auto& d : j.at("discretizers")) {
      const auto range = d.at("range").get<std::vector<double>>();
      if (range.size() != 2) throw ConfigError("discretizer range needs [lo, hi]");
      auto disc = Discretizer::from_parts(
          d.at("parameter").get<std::string>(), d.at("split_points").get<std::vector<double>>(),
          d.at("bin_labels").get<std::vector<std::string>>(),
          d.at("representatives").get<std::vector<double>>(), d.at("fitted_in_log").get<bool>(), range[0],
          range[1]);
      out.emplace(disc.parameter(), std::move(disc));
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("discretizers: ") + e.what());
  }
  return out;
}

json experience_to_json(const CanonicalExperience& e) {
  return json{{"task_id", e.task_id},
              {"space_id", e.space_id},
              {"solution_text", e.solution_text},
              {"discrete_solution", e.discrete_solution},
              {"metric", e.metric}};
}

CanonicalExperience experience_from_json(const json& j) {
  CanonicalExperience e;
  e.task_id = j.at("task_id").get<std::string>();
  e.space_id = j.at("space_id").get<std::string>();
  e.solution_text = j.at("solution_text").get<std::string>();
  e.discrete_solution = j.at("discrete_solution").get<DiscreteSolution>();
  e.metric = j.at("metric").get<double>();
  return e;
}

json knowledge_to_json(const KnowledgeItem& k) {
  return json{{"space_id", k.space_id},
              {"text", k.text},
              {"validation_score", k.validation_score},
              {"provenance",
               {{"question", k.provenance.question},
                {"temperature", k.provenance.temperature},
                {"round", k.provenance.round}}}};
}

KnowledgeItem knowledge_from_json(const json& j) {
  KnowledgeItem k;
  k.space_id = j.at("space_id").get<std::string>();
  k.text = j.at("text").get<std::string>();
  k.validation_score = j.at("validation_score").get<double>();
  if (j.contains("provenance")) {
    const json& p = j.at("provenance");
    k.provenance.question = p.value("question", "");
    k.provenance.temperature = p.value("temperature", 0.0);
    k.provenance.round = p.value("round", 0);
  }
  k.validate();
  return k;
}

std::vector<KnowledgeItem> load_knowledge(const std::filesystem::path& path) {
  std::vector<KnowledgeItem> out;
  for_each_json_line(path, [&](const json& j, std::size_t) { out.push_back(knowledge_from_json(j)); });
  return out;
}

std::vector<CachedEmbedding> load_embeddings(const std::filesystem::path& path) {
  std::vector<CachedEmbedding> out;
  for_each_json_line(path, [&](const json& j, std::size_t) {
    out.push_back({j.at("task_id").get<std::string>(),
                   {j.at("values").get<std::vector<double>>(), j.at("model_tag").get<std::string>()}});
  });
  return out;
}

json embedding_to_json(const CachedEmbedding& e) {
  return json{{"task_id", e.task_id}, {"model_tag", e.embedding.model_tag}, {"values", e.embedding.values}};
}

}  // namespace expcopilot::io
