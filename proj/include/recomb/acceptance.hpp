#pragma once

// The acceptance suite: fourteen checks shared by the acceptance binary
// and `recomb selftest`.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "recomb/cube.hpp"
#include "recomb/rng.hpp"

namespace recomb {

/// Random Pmf with exponential weights, sharpened by a random power so
/// that some draws are far from uniform.
Pmf random_pmf(int n, RandomStream& rng);

/// symmetrize(random_pmf): every marginal is exactly balanced.
Pmf random_balanced_pmf(int n, RandomStream& rng);

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  /// Set when the failure is explained by a known defect in the stated
  /// target rather than in the implementation (see the README).
  std::string known_issue;
  std::string detail;
  double seconds = 0.0;
};

struct AcceptanceOptions {
  std::uint64_t seed = 0x5eed2024;
  std::vector<int> only;  // empty: all criteria
};

inline constexpr int kCriteria = 14;

CriterionResult run_criterion(int id, const AcceptanceOptions& options);

std::vector<CriterionResult> run_acceptance(
    const AcceptanceOptions& options,
    const std::function<void(const CriterionResult&)>& on_result = {});

/// "[PASS] 3 profile ..." style one-line summary.
std::string format_result(const CriterionResult& r);

/// True iff every failure carries a known_issue.
bool acceptance_ok(const std::vector<CriterionResult>& results);

}  // namespace recomb
