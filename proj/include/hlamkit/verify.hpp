#pragma once

#include <functional>
#include <string>
#include <vector>

namespace hlamkit {

struct CheckResult {
  bool pass = false;
  std::string detail;
};

struct Check {
  std::string name;
  std::string summary;
  std::function<CheckResult()> run;
};

// The desk-scale verification suite: barrier table, solver equivalences,
// access-count model, distributed correctness, sweep-order properties,
// restart behavior, determinism, bench harness shape. Shared between the
// `verify` CLI subcommand and the acceptance test binary.
const std::vector<Check>& verification_checks();

// Runs checks whose name contains `filter` (all when empty), printing one
// pass/fail line each. Returns the number of failures.
int run_verification(const std::string& filter, std::ostream& os);

}  // namespace hlamkit
