#include "expcopilot/prompt.hpp"

#include <cmath>
#include <regex>

#include "expcopilot/error.hpp"

namespace expcopilot {

std::size_t estimate_tokens(std::string_view text, double chars_per_token) {
  return static_cast<std::size_t>(std::ceil(static_cast<double>(text.size()) / chars_per_token));
}

Demonstration make_demonstration(const PoolEntry& entry, std::size_t max_solutions) {
  Demonstration d;
  d.description = entry.task.description;
  for (std::size_t i = 0; i < entry.best.size() && i < max_solutions; ++i)
    d.solution_texts.push_back(entry.best[i].solution_text);
  return d;
}

const std::vector<std::string>& default_questions() {
  static const std::vector<std::string> questions = {
      "From the examples above, what patterns can we observe about the relationship between dataset "
      "characteristics and the best hyper-parameter configurations? Answer MUST be concise, critical, "
      "point-by-point, line-by-line, and brief. Only include relevant observations without unnecessary "
      "elaboration.",
      "Looking at the examples above, which dataset characteristics decide the best hyper-parameter "
      "configurations? State each rule on its own line, briefly.",
      "If you had to configure this learner for an unseen dataset, which guidelines would you take from "
      "the examples above? Be specific and brief, one guideline per line.",
      "What do the best configurations above have in common, and how do they shift as the datasets "
      "change? Answer in short numbered points.",
  };
  return questions;
}

namespace {

std::string demo_block(const Demonstration& d, std::size_t max_solutions) {
  std::string block = "Dataset: " + d.description;
  for (std::size_t i = 0; i < d.solution_texts.size() && i < max_solutions; ++i)
    block += "\nConfiguration " + std::to_string(i + 1) + ": " + d.solution_texts[i];
  return block;
}

std::string join_sections(const std::vector<std::string>& sections) {
  std::string out;
  for (const auto& s : sections) {
    if (!out.empty()) out += "\n\n";
    out += s;
  }
  return out;
}

std::string replace_all(std::string s, std::string_view from, std::string_view to) {
  for (std::size_t pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size()))
    s.replace(pos, from.size(), to);
  return s;
}

}  // namespace

std::string build_elicitation_prompt(const SolutionSpace& space,
                                     std::span<const Demonstration> groups,
                                     std::string_view question) {
  if (groups.empty()) throw Error("elicitation prompt needs at least one task");
  std::vector<std::string> sections{space.description()};
  for (const auto& g : groups) sections.push_back(demo_block(g, g.solution_texts.size()));
  sections.push_back("Q: " + std::string(question));
  return join_sections(sections);
}

void SuggestionConfig::validate() const {
  if (n_suggestions < 1) throw ConfigError("suggestion: n_suggestions must be >= 1");
  if (demos_per_task < 1) throw ConfigError("suggestion: demos_per_task must be >= 1");
  if (token_budget < 256) throw ConfigError("suggestion: token_budget must be >= 256");
  if (k_tasks && *k_tasks < 1) throw ConfigError("suggestion: k_tasks must be >= 1");
  if (!(temperature >= 0.0 && temperature <= 1.0))
    throw ConfigError("suggestion: temperature must be in [0, 1]");
  if (!(chars_per_token > 0.0)) throw ConfigError("suggestion: chars_per_token must be positive");
}

std::vector<std::string> guideline_sentences(std::string_view knowledge_text) {
  static const std::regex bullet(R"(^\s*(?:\d+\s*[.)]|[-*])\s*)");
  std::vector<std::string> out;
  std::string line;
  auto flush = [&] {
    std::string s = std::regex_replace(line, bullet, "", std::regex_constants::format_first_only);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
    if (!s.empty()) out.push_back(std::move(s));
    line.clear();
  };
  for (char c : knowledge_text) {
    if (c == '\n')
      flush();
    else if (c != '\r')
      line.push_back(c);
  }
  flush();
  return out;
}

SuggestionPrompt build_suggestion_prompt(const SolutionSpace& space, const Task& task,
                                         std::span<const Demonstration> demos,
                                         std::span<const KnowledgeItem> knowledge,
                                         const SuggestionConfig& cfg) {
  cfg.validate();

  std::string guidelines;
  std::size_t numbered = 0;
  for (const auto& k : knowledge)
    for (const auto& s : guideline_sentences(k.text))
      guidelines += "\n" + std::to_string(++numbered) + ". " + s;
  const bool has_guidelines = numbered > 0;

  const std::string directive =
      replace_all(replace_all(cfg.instruction_template, "{n}", std::to_string(cfg.n_suggestions)), "{kind}",
                  cfg.task_kind);

  auto assemble = [&](std::size_t n_demos) {
    std::vector<std::string> sections{space.description()};
    for (std::size_t i = 0; i < n_demos; ++i) sections.push_back(demo_block(demos[i], cfg.demos_per_task));
    if (has_guidelines) sections.push_back("Guidelines:" + guidelines);
    std::string instruction;
    if (n_demos > 0 && has_guidelines)
      instruction = "Based on the examples and guidelines above, " + directive;
    else if (n_demos > 0)
      instruction = "Based on the examples above, " + directive;
    else if (has_guidelines)
      instruction = "Based on the guidelines above, " + directive;
    else {
      instruction = directive;
      if (!instruction.empty()) instruction[0] = static_cast<char>(std::toupper(instruction[0]));
    }
    sections.push_back(std::move(instruction));
    sections.push_back("Dataset: " + task.description);
    return join_sections(sections);
  };

  SuggestionPrompt out{assemble(0), 0};
  if (estimate_tokens(out.text, cfg.chars_per_token) > cfg.token_budget)
    throw BudgetError("budget exhausted: " + std::to_string(cfg.token_budget) +
                      " tokens cannot hold the prompt without demonstrations");
  const std::size_t limit = std::min(demos.size(), cfg.k_tasks.value_or(demos.size()));
  for (std::size_t n = 1; n <= limit; ++n) {
    std::string candidate = assemble(n);
    if (estimate_tokens(candidate, cfg.chars_per_token) > cfg.token_budget) break;
    out = {std::move(candidate), n};
  }
  return out;
}

}  // namespace expcopilot
