// Acceptance suite: nine quantitative criteria with fixed parameters and tolerances.
#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

namespace sipx {

struct AcceptanceOptions {
  int threads = 0;
  std::uint64_t seed = 20260417;
  /// Working directory for harness runs made by the criteria.
  std::filesystem::path scratch = "acceptance_runs";
};

struct CriterionResult {
  int id = 0;
  std::string title;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
  double budget_seconds = 0.0;
};

std::vector<int> all_criteria();
std::string criterion_title(int id);

/// Runs one criterion; exceptions are caught and reported as failures.
CriterionResult run_criterion(int id, const AcceptanceOptions& options);

std::vector<CriterionResult> run_acceptance(const std::vector<int>& ids, const AcceptanceOptions& options,
                                            const std::function<void(const CriterionResult&)>& on_result = {});

/// "criterion <id> <title>: PASS|FAIL (<s> s) <detail>"
std::string format_result(const CriterionResult& r);

}  // namespace sipx
