// Acceptance gate: runs every "acceptance/NN" check and prints one verdict
// line per criterion. Exits nonzero when any criterion fails. An optional
// first argument names the installed CLI binary so the process-level
// round-trip check can exercise the real executable.
#include "msmwc/checks.hpp"

#include <cstdlib>
#include <iostream>

int main(int argc, char** argv) {
  if (argc > 1) {
    setenv("MSMWC_CLI_BIN", argv[1], 1);
  }
  const auto results = msmwc::run_checks("acceptance", &std::cout);
  if (results.empty()) {
    std::cerr << "no acceptance checks registered\n";
    return 2;
  }
  int failed = 0;
  for (const auto& r : results) failed += r.pass ? 0 : 1;
  std::cout << results.size() - failed << "/" << results.size()
            << " acceptance criteria passed\n";
  return failed == 0 ? 0 : 1;
}
