#pragma once

// Built-in verification suite: nine numbered criteria covering exponent
// recovery, the closed-form residual identity, scale invariance, the
// quantum-potential and effective-mass oracles, the R-form residual,
// trajectory integration, pointwise gradient checks, and the
// Hamilton-Jacobi bracket.  Every tolerance is fixed here in code.

#include <iosfwd>
#include <string>
#include <vector>

namespace machq {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

std::vector<CriterionResult> run_selftest();

// Runs the suite, prints one [PASS]/[FAIL] line per criterion, returns the
// number of failures.
int print_selftest(std::ostream& os);

} // namespace machq
