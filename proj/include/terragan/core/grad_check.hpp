#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "terragan/core/autograd.hpp"

namespace terragan {

struct GradCheckOptions {
  /// Pass threshold on the per-input max relative error.
  double tolerance = 1e-3;
  /// Central-difference half step.
  double step = 1e-3;
  /// Inputs with more elements are checked on a seeded random subsample of this size.
  std::size_t max_elements = 1000;
  std::uint64_t subsample_seed = 0;
  /// Elements whose one-sided differences disagree by more than this fraction
  /// of the input's gradient scale straddle a kink (leaky_relu, abs, clamp)
  /// and are skipped, as are elements whose central difference shifts by more
  /// than `tolerance` of the scale when the step is halved. An input fails if
  /// more elements are skipped than checked.
  double kink_fraction = 0.05;
};

struct GradCheckEntry {
  std::string name;
  std::size_t checked = 0;
  std::size_t skipped_nonsmooth = 0;
  /// max_i |analytic_i - numeric_i| / max(max_i |analytic_i|, max_i |numeric_i|)
  double max_relative_error = 0.0;
  bool passed = true;
};

struct GradCheckReport {
  std::vector<GradCheckEntry> entries;
  double tolerance = 0.0;

  bool passed() const;
  double worst() const;
};

template <typename Real>
struct GradCheckInput {
  std::string name;
  BasicTensor<Real> value;
};

/// Builds the scalar loss from one tape variable per input.
template <typename Real>
using GraphBuilder = std::function<Var<Real>(Tape<Real>&, std::span<const Var<Real>>)>;

/// Compares reverse-mode gradients of `build` against central finite differences.
/// The builder must be deterministic: it is re-run for every perturbation.
template <typename Real>
GradCheckReport grad_check(const GraphBuilder<Real>& build, std::span<const GradCheckInput<Real>> inputs,
                           const GradCheckOptions& options);

}  // namespace terragan
