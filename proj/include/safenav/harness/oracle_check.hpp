#pragma once

#include <ostream>

namespace safenav::harness {

// Runs the derived-value oracle suites (closed forms vs independent
// computations) and prints one pass/fail line per suite. Returns the number
// of failing suites.
int run_oracle_checks(std::ostream& out);

}  // namespace safenav::harness
