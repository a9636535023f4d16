#pragma once

// End-to-end verification suite: analytic oracles and property gates over
// the whole pipeline, from geometry through the coupled transport runs.
// Every detail string is rendered through format_double, so repeating the
// suite on the same build reproduces the report byte for byte; wall times
// are kept out of the report and surface only on the console.

#include <string>
#include <vector>

namespace poroscale {

struct CriterionResult {
  int index = 0;
  std::string name;
  bool pass = false;
  std::string detail;    // measured values against their gates
  double seconds = 0.0;  // never rendered into the report
};

// Criteria 1 through 11. A thrown exception fails the criterion with the
// error text instead of aborting the suite. The determinism criterion is
// the caller's: run twice, compare the rendered reports, append it.
std::vector<CriterionResult> run_acceptance();

// One line per criterion plus a final tally line.
std::string acceptance_report(const std::vector<CriterionResult>& results);

}  // namespace poroscale
