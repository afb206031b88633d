// Runs every numbered acceptance criterion at its pinned tolerance and prints
// one PASS/FAIL line each.

#include <iostream>

#include "sclab/acceptance.hpp"

int main() {
  auto results = sclab::run_acceptance(&std::cout);
  int failures = sclab::print_results(results, std::cout);
  if (failures > 0) {
    std::cout << failures << " criterion(s) failed\n";
    return 1;
  }
  std::cout << "all criteria passed\n";
  return 0;
}
