#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace sqg {

struct CriterionResult {
  int id = 0;
  std::string title;
  bool passed = false;
  // Measured values and the tolerances they were checked against.
  std::string detail;
  double seconds = 0.0;
};

struct AcceptanceOptions {
  std::vector<int> criteria;  // empty: 1..11
  int threads = 0;
  // Criterion 11 writes its paired runs here.
  std::string scratch_dir = "acceptance_scratch";
  // Progress and per-criterion lines; may be null.
  std::ostream* log = nullptr;
};

// Runs the acceptance criteria in order. Criteria 5 to 8 share one inviscid
// sweep, which is computed once when any of them is requested.
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options);

// One line per criterion: "PASS  C<n>  <title>  <detail>".
std::string format_line(const CriterionResult& r);
std::string format_table(const std::vector<CriterionResult>& results);

}  // namespace sqg
