#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace msmwc {

// One property or acceptance check: "module/name", pass verdict, and a short
// human-readable detail (measured values, tolerances).
struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0;
};

// Names of the registered check groups (the part before the slash).
std::vector<std::string> check_modules();

// Execute every registered check whose module matches `only` (empty = all),
// streaming one PASS/FAIL line per check to `log` when given. Checks never
// throw; an escaped exception is converted into a failed result.
std::vector<CheckResult> run_checks(const std::string& only = "",
                                    std::ostream* log = nullptr);

}  // namespace msmwc
