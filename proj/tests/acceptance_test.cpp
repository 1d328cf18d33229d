// Runs all eleven acceptance criteria and prints one line per criterion.
#include <iostream>

#include "qnormal/acceptance.hpp"

int main() {
  auto results = qn::run_acceptance(qn::all_criteria());
  std::cout << qn::format_table(results);
  for (const auto& r : results)
    if (!r.pass) return 1;
  return 0;
}
