#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace egdeg {

struct VerifyOptions {
  std::uint64_t seed = 1;
};

/// Outcome of one acceptance property. `cases` holds one JSON object per
/// checked instance; nothing in it depends on timing or the worker count.
struct CriterionResult {
  int id = 0;
  std::string name;
  int checks = 0;
  int failures = 0;
  nlohmann::json cases = nlohmann::json::array();

  bool pass() const { return checks > 0 && failures == 0; }
  nlohmann::json to_json() const;
};

CriterionResult verify_normalization(const VerifyOptions& opt);      // 1
CriterionResult verify_additivity(const VerifyOptions& opt);         // 2
CriterionResult verify_vanishing(const VerifyOptions& opt);          // 3
CriterionResult verify_split_consistency(const VerifyOptions& opt);  // 4
CriterionResult verify_z2_line(const VerifyOptions& opt);            // 5
CriterionResult verify_s1_demo(const VerifyOptions& opt);            // 6
CriterionResult verify_degree_oracle(const VerifyOptions& opt);      // 7
CriterionResult verify_quotient_division(const VerifyOptions& opt);  // 8
CriterionResult verify_partition_suite(const VerifyOptions& opt);    // 9
/// Runs the axioms suite with 1 and 4 workers and compares the dumps.
CriterionResult verify_determinism(const VerifyOptions& opt);        // 10

struct SuiteReport {
  std::string suite;
  std::uint64_t seed = 1;
  std::vector<CriterionResult> criteria;

  bool pass() const;
  nlohmann::json to_json() const;
};

/// Suites: axioms (1–6, 8), degree (7), partition (9), all (1–10).
/// Throws UnknownName for other names.
SuiteReport run_suite(const std::string& suite, const VerifyOptions& opt);
std::vector<std::string> suite_names();

}  // namespace egdeg
