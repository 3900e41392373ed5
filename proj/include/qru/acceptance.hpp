#pragma once

// Brute-force checks behind the acceptance binary and `qru oracle`.

#include <cstdint>
#include <string>
#include <vector>

namespace qru {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  /// One-line summary of the measured quantities.
  std::string summary;
  /// Per-item lines (one per model, L, lattice point ...).
  std::vector<std::string> details;
  double seconds = 0.0;
};

struct AcceptanceOptions {
  std::uint64_t seed = 20240601;
  int threads = 1;
};

struct CriterionInfo {
  int id;
  const char* name;
};

const std::vector<CriterionInfo>& criteria();

/// Looks a criterion up by number ("4") or name ("lipschitz-bracket");
/// returns 0 when unknown.
int find_criterion(const std::string& key);

CriterionResult run_criterion(int id, const AcceptanceOptions& options = {});

}  // namespace qru
