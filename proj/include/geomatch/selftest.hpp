#pragma once

#include <string>
#include <vector>

namespace geomatch {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct SelftestOptions {
  /// Deliberate fault injected into one check; "" for none. Known values:
  /// "varifold-grad-sign", "path-energy-grad-scale", "shoot-grad-sign".
  std::string mutation;
};

/// Fast invariant suite: gradient checks, metric axioms on the bundled corpus,
/// and the single-landmark shooting oracle. Fully deterministic.
std::vector<CheckResult> run_selftest(const SelftestOptions& opts = {});

/// Names accepted by SelftestOptions::mutation.
std::vector<std::string> known_mutations();

}  // namespace geomatch
