#pragma once

// JSON / JSON Lines persistence for spaces, tasks, history, pools,
// discretizers, embeddings and knowledge.

#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "expcopilot/canonical.hpp"
#include "expcopilot/retrieval.hpp"
#include "expcopilot/space.hpp"
#include "json.hpp"

namespace expcopilot::io {

using json = nlohmann::json;

SolutionSpace space_from_json(const json& j);
json space_to_json(const SolutionSpace& space);
SolutionSpace load_space(const std::filesystem::path& path);

Task task_from_json(const json& j);
json task_to_json(const Task& t);
std::vector<Task> load_tasks(const std::filesystem::path& path);

Solution solution_from_json(const json& values, const SolutionSpace& space);
json solution_to_json(const Solution& s);

// History lines: {"task_id", "values", "metric"}; tasks resolved by id.
std::vector<ExperienceRecord> load_history(const std::filesystem::path& path,
                                           const std::map<std::string, Task>& tasks,
                                           const SolutionSpace& space);

json discretizers_to_json(const std::string& space_id, const DiscretizerSet& set);
DiscretizerSet discretizers_from_json(const json& j);

json experience_to_json(const CanonicalExperience& e);
CanonicalExperience experience_from_json(const json& j);

json knowledge_to_json(const KnowledgeItem& k);
KnowledgeItem knowledge_from_json(const json& j);
std::vector<KnowledgeItem> load_knowledge(const std::filesystem::path& path);

struct CachedEmbedding {
  std::string task_id;
  EmbeddingVector embedding;
};
std::vector<CachedEmbedding> load_embeddings(const std::filesystem::path& path);
json embedding_to_json(const CachedEmbedding& e);

// Calls `fn(line_json, line_number)` for every non-blank line; JSON and
// validation errors are rethrown as LoadError with the line number.
void for_each_json_line(const std::filesystem::path& path,
                        const std::function<void(const json&, std::size_t)>& fn);

json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace expcopilot::io
