// The acceptance suite: eleven property and oracle checks over the whole
// pipeline. Shared by the acceptance test binary and `qnormal verify`.
#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace qn {

struct CriterionResult {
  int id = 0;
  std::string title;
  bool pass = false;
  // What was checked, the numbers behind the verdict, and every failure.
  nlohmann::json details;
};

inline constexpr int kCriterionCount = 11;

// Runs the listed criteria (1..11) in order. Criterion 11 reruns 1..10 twice
// and compares the serialized results byte for byte.
std::vector<CriterionResult> run_acceptance(const std::vector<int>& ids);
std::vector<int> all_criteria();

// "all" or a comma-separated list such as "1,4,7".
std::vector<int> parse_suite(const std::string& suite);

nlohmann::json to_json(const CriterionResult& r);
nlohmann::json acceptance_report(const std::vector<CriterionResult>& results);
// One line per criterion: "[PASS] 4  radii validity".
std::string format_table(const std::vector<CriterionResult>& results);

}  // namespace qn
