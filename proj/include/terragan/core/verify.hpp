#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace terragan {

/// Finite-difference results for one differentiable operation at one precision.
struct OpCheckResult {
  std::string op;
  std::string precision;  // "float32" / "float64"
  int instances = 0;
  int passed = 0;
  double worst = 0.0;
  double tolerance = 0.0;
  std::size_t checked = 0;
  std::size_t skipped_nonsmooth = 0;

  bool ok() const { return instances > 0 && passed == instances; }
};

struct VerificationReport {
  std::vector<OpCheckResult> results;
  bool passed() const;
};

/// Grad-checks every differentiable op on `instances` random shapes in both
/// precisions (1e-3 relative at 32 bit, 1e-6 at 64 bit).
VerificationReport run_gradient_suite(int instances, std::uint64_t seed);

}  // namespace terragan
