#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace insfem {

struct CriterionResult {
  std::string name;
  bool pass = false;
  std::string details;
  double seconds = 0.0;
};

std::vector<std::string> acceptance_suite_names();

// Runs the named verification suites ("all" for every one) and returns one
// result per suite. Each sub-check is listed in `details`.
std::vector<CriterionResult> run_acceptance(const std::vector<std::string>& suites,
                                            std::ostream* log = nullptr);

}  // namespace insfem
