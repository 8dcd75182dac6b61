#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace cinderella {

enum class CheckLevel { Quick, Full };

struct CheckEntry {
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

struct CheckReport {
  CheckLevel level = CheckLevel::Quick;
  std::vector<CheckEntry> entries;

  bool all_passed() const;
  nlohmann::json to_json() const;
};

struct CheckOptions {
  /// Multiplier on the concentration radius in the optimism check.
  double bonus_scale = 1.0;
  /// Parameter-set diameter in the optimism check.
  double param_radius = 2.0;
  std::uint64_t seed = 0;
};

/// Runs the invariant suites: partition, features, regression, optimism,
/// taylor, inherent_error. Failures are report entries, never exceptions.
CheckReport check_suite(CheckLevel level, const CheckOptions& options = {});

/// Fraction of (seed, episode) pairs with optimistic V_1(s1) >= V*_1(s1) - 1e-6
/// on the one-step exact linear env with constant features and the exact-grid planner.
double optimism_rate(int seeds, int episodes, const CheckOptions& options);

} // namespace cinderella
