// Acceptance gate: runs every built-in verification suite and prints one
// pass/fail line per criterion. Exit status is nonzero if any criterion
// fails.
#include <cstdio>

#include "insfem/acceptance.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> which;
  for (int i = 1; i < argc; ++i) which.push_back(argv[i]);
  const auto results = insfem::run_acceptance(which);
  bool all = true;
  double total = 0;
  for (const auto& r : results) {
    std::printf("[%s] %-18s (%.1f s)\n", r.pass ? "PASS" : "FAIL", r.name.c_str(), r.seconds);
    std::fputs(r.details.c_str(), stdout);
    std::fflush(stdout);
    all = all && r.pass;
    total += r.seconds;
  }
  std::printf("%zu criteria, total %.1f s\n", results.size(), total);
  return all ? 0 : 1;
}
