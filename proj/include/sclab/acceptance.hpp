#pragma once

// The verification gate: one entry per numbered criterion, each evaluated at
// its pinned tolerance against the desk-scale reference configuration.

#include <ostream>
#include <string>
#include <vector>

#include "sclab/config.hpp"

namespace sclab {

struct CriterionResult {
  std::string id;
  std::string description;
  bool pass = false;
  std::string detail;
};

// Full reference suite A1..A9.
std::vector<CriterionResult> run_acceptance(std::ostream* progress = nullptr);

// Config-driven checks used by `verify --config`: identity, conservation and
// degenerate-potential behavior for an arbitrary valid configuration.
std::vector<CriterionResult> run_config_checks(const RunConfig& cfg);

// Prints one PASS/FAIL line per criterion; returns the number of failures.
int print_results(const std::vector<CriterionResult>& results, std::ostream& os);

}  // namespace sclab
