#pragma once

// The twelve acceptance checks. Each produces one verdict named cNN_<name>
// plus the rows it was decided on (experiment column "verify-all/cNN").

#include <cstdint>
#include <string>
#include <vector>

#include "nonstatcov/harness/experiments.hpp"

namespace nonstatcov::harness {

struct Criterion {
  int id;
  std::string name;
  std::string summary;
};

const std::vector<Criterion>& acceptance_criteria();

/// Runs criterion `id` in [1, 11]; `vma` is the kappa = 4 tv-VMA under test.
Outcome run_criterion(int id, const ModelSpec& vma, std::uint64_t seed);

/// Criteria 1..11, then criterion 12: the same checks rerun with a different
/// thread count must render byte-identical tables.
Outcome verify_all(const ModelSpec& vma, std::uint64_t seed);

}  // namespace nonstatcov::harness
