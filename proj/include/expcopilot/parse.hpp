#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "expcopilot/space.hpp"

namespace expcopilot {

struct ParseIssue {
  std::size_t configuration = 0;  // number as written in the response
  std::string clause;
  std::string reason;
};

struct ScanResult {
  std::vector<DiscreteSolution> solutions;  // complete, valid configurations in order
  std::vector<ParseIssue> issues;           // clauses of rejected configurations
  std::size_t configurations_seen = 0;
};

// Reads every "Configuration <i>: ..." line (case-insensitive) and parses its
// "<name> is <value>" clauses against the space. A configuration with any
// unknown name, unknown level or choice, duplicate, inactive or missing
// parameter is rejected as a whole and its problems reported.
ScanResult scan_configurations(std::string_view response, const SolutionSpace& space);

// Strict variant: throws ParseError listing every offending clause when any
// configuration is rejected or none is found. Returns at most expected_n.
std::vector<DiscreteSolution> parse_solutions(std::string_view response, const SolutionSpace& space,
                                              std::size_t expected_n);

}  // namespace expcopilot
