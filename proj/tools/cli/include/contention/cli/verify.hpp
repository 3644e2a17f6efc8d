#pragma once

// Self-verification suite: every acceptance criterion as a named check with
// expected / actual / tolerance.

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "contention/prob_core.hpp"

namespace contention::cli {

struct VerifyOptions {
  std::uint64_t seed = 42;
  std::uint64_t slots = 1'000'000;
  /// When set, replaces the threshold solver in every criterion that builds
  /// a code or asks for an optimal threshold.
  ThresholdRule threshold_fault;
  unsigned workers = 0;
  /// Criterion ids to run; empty runs all of them.
  std::vector<int> only;
};

struct Check {
  std::string label;
  std::string expected;
  std::string actual;
  std::string tolerance;
  bool passed = false;
};

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::vector<Check> checks;
  double seconds = 0.0;
};

inline constexpr int kCriterionCount = 10;

std::vector<CriterionResult> run_acceptance(const VerifyOptions& options = {});
CriterionResult run_criterion(int id, const VerifyOptions& options = {});

/// "[PASS]  3 osa universal bound (12.4 s)" followed by one indented line
/// per failed check.
std::string format_result(const CriterionResult& result, bool all_checks = false);

nlohmann::json to_json(const CriterionResult& result);

}  // namespace contention::cli
