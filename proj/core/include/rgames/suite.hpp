#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace rgames {

// Named property batteries runnable from the command line and from the
// acceptance harness.  Every battery is deterministic under a fixed seed
// and exact: each check is a symbolic equality, so a battery either passes
// or reports the first failing check.

struct SuiteCase {
  std::string name;
  bool passed = false;
  std::string detail;  // empty on pass, first failure otherwise
};

struct SuiteReport {
  std::vector<SuiteCase> cases;
  bool all_passed() const;
};

/// Registered battery names, in execution order.
std::vector<std::string> suite_names();

/// Runs one battery by name, or every battery for "all".  Unknown names
/// throw InvalidArgument.
SuiteReport run_suite(const std::string& name, std::uint64_t seed);

}  // namespace rgames
