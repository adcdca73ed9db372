#include "expcopilot/parse.hpp"

#include <regex>

#include "expcopilot/error.hpp"

namespace expcopilot {

namespace {

std::vector<std::string> split_clauses(const std::string& body) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= body.size()) {
    const std::size_t dot = body.find(". ", start);
    std::string piece = body.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    while (!piece.empty() && (piece.back() == '.' || piece.back() == ' ')) piece.pop_back();
    while (!piece.empty() && piece.front() == ' ') piece.erase(piece.begin());
    if (!piece.empty()) out.push_back(std::move(piece));
    if (dot == std::string::npos) break;
    start = dot + 2;
  }
  return out;
}

}  // namespace

ScanResult scan_configurations(std::string_view response, const SolutionSpace& space) {
  static const std::regex header(R"(^\s*configuration\s+(\d+)\s*:(.*)$)", std::regex::icase);
  ScanResult result;

  std::size_t pos = 0;
  while (pos <= response.size()) {
    const std::size_t nl = response.find('\n', pos);
    std::string line(response.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos));
    pos = nl == std::string_view::npos ? response.size() + 1 : nl + 1;

    std::smatch m;
    if (!std::regex_match(line, m, header)) continue;
    ++result.configurations_seen;
    const std::size_t number = std::stoul(m[1].str());

    std::vector<ParseIssue> issues;
    DiscreteSolution d;
    for (const auto& clause : split_clauses(normalize_text(m[2].str()))) {
      const std::size_t is = clause.find(" is ");
      if (is == std::string::npos) {
        issues.push_back({number, clause, "expected '<name> is <value>'"});
        continue;
      }
      const std::string name = clause.substr(0, is);
      const std::string value = clause.substr(is + 4);
      const ParameterDef* p = space.find_normalized(name);
      if (!p) {
        issues.push_back({number, clause, "unknown parameter '" + name + "'"});
        continue;
      }
      std::string resolved;
      if (p->is_numeric()) {
        auto level = space.canonical_level(value);
        if (!level) {
          issues.push_back({number, clause, "unknown level '" + value + "'"});
          continue;
        }
        resolved = *level;
      } else {
        const std::string* choice = p->find_choice(value);
        if (!choice) {
          issues.push_back({number, clause, "unknown choice '" + value + "'"});
          continue;
        }
        resolved = *choice;
      }
      if (!d.emplace(p->name, resolved).second)
        issues.push_back({number, clause, "duplicate parameter '" + p->name + "'"});
    }

    if (issues.empty()) {
      for (const auto& p : space.parameters()) {
        const bool present = d.count(p.name) != 0;
        const bool active = space.is_active(p, d);
        if (active && !present) issues.push_back({number, p.name, "missing parameter '" + p.name + "'"});
        if (!active && present)
          issues.push_back({number, p.name, "parameter '" + p.name + "' is inactive here"});
      }
    }

    if (issues.empty())
      result.solutions.push_back(std::move(d));
    else
      result.issues.insert(result.issues.end(), issues.begin(), issues.end());
  }
  return result;
}

std::vector<DiscreteSolution> parse_solutions(std::string_view response, const SolutionSpace& space,
                                              std::size_t expected_n) {
  ScanResult r = scan_configurations(response, space);
  if (!r.issues.empty() || r.solutions.empty()) {
    std::string what = "could not parse configurations";
    if (r.configurations_seen == 0) what += ": no 'Configuration <i>:' lines";
    for (const auto& i : r.issues)
      what += "; configuration " + std::to_string(i.configuration) + ": '" + i.clause + "' (" + i.reason + ")";
    throw ParseError(what);
  }
  if (r.solutions.size() > expected_n) r.solutions.resize(expected_n);
  return r.solutions;
}

}  // namespace expcopilot
