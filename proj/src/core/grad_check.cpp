#include "terragan/core/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "terragan/core/errors.hpp"

namespace terragan {

bool GradCheckReport::passed() const {
  return std::all_of(entries.begin(), entries.end(), [](const auto& e) { return e.passed; });
}

double GradCheckReport::worst() const {
  double w = 0.0;
  for (const auto& e : entries) w = std::max(w, e.max_relative_error);
  return w;
}

namespace {

template <typename Real>
double evaluate(const GraphBuilder<Real>& build, const std::vector<BasicTensor<Real>>& values) {
  Tape<Real> tape;
  std::vector<Var<Real>> vars;
  vars.reserve(values.size());
  for (const auto& v : values) vars.push_back(tape.constant(v));
  const auto loss = build(tape, vars);
  if (loss.value().numel() != 1) throw ContractError("grad_check graph must produce a scalar");
  return static_cast<double>(loss.value()[0]);
}

}  // namespace

template <typename Real>
GradCheckReport grad_check(const GraphBuilder<Real>& build, std::span<const GradCheckInput<Real>> inputs,
                           const GradCheckOptions& options) {
  std::vector<BasicTensor<Real>> values;
  for (const auto& in : inputs) values.push_back(in.value);

  std::vector<BasicTensor<Real>> analytic;
  double f0 = 0.0;
  {
    Tape<Real> tape;
    std::vector<Var<Real>> vars;
    for (const auto& v : values) vars.push_back(tape.variable(v));
    const auto loss = build(tape, vars);
    tape.backward(loss);
    f0 = static_cast<double>(loss.value()[0]);
    for (const auto& v : vars) {
      analytic.push_back(tape.has_grad(v) ? tape.grad(v) : BasicTensor<Real>(v.shape()));
    }
  }

  GradCheckReport report;
  report.tolerance = options.tolerance;
  Rng rng(options.subsample_seed);
  const double h = options.step;

  for (std::size_t k = 0; k < values.size(); ++k) {
    const std::size_t n = values[k].numel();
    std::vector<std::size_t> picks(n);
    std::iota(picks.begin(), picks.end(), std::size_t{0});
    if (n > options.max_elements) {
      for (std::size_t i = 0; i < options.max_elements; ++i) std::swap(picks[i], picks[i + rng.below(n - i)]);
      picks.resize(options.max_elements);
      std::sort(picks.begin(), picks.end());
    }

    struct Sample {
      double analytic, central, half, forward, backward;
    };
    std::vector<Sample> samples;
    samples.reserve(picks.size());
    for (std::size_t idx : picks) {
      const Real original = values[k][idx];
      // Differences use the representable perturbation actually applied.
      auto at = [&](double offset, double& applied) {
        values[k][idx] = static_cast<Real>(static_cast<double>(original) + offset);
        applied = static_cast<double>(values[k][idx]) - static_cast<double>(original);
        return evaluate(build, values);
      };
      double hp = 0, hm = 0, qp = 0, qm = 0;
      const double f_plus = at(h, hp);
      const double f_minus = at(-h, hm);
      const double f_half_plus = at(h / 2, qp);
      const double f_half_minus = at(-h / 2, qm);
      values[k][idx] = original;
      samples.push_back({static_cast<double>(analytic[k][idx]), (f_plus - f_minus) / (hp - hm),
                         (f_half_plus - f_half_minus) / (qp - qm), (f_plus - f0) / hp, (f0 - f_minus) / -hm});
    }

    double scale = 0.0;
    for (const auto& s : samples) scale = std::max({scale, std::abs(s.analytic), std::abs(s.central)});

    GradCheckEntry entry;
    entry.name = inputs[k].name;
    for (const auto& s : samples) {
      // A kink inside the stencil shows up either as one-sided slopes that
      // disagree or as a central difference that moves when the step halves.
      if (scale > 0.0 && (std::abs(s.forward - s.backward) > options.kink_fraction * scale ||
                          std::abs(s.central - s.half) > options.tolerance * scale)) {
        ++entry.skipped_nonsmooth;
        continue;
      }
      ++entry.checked;
      if (scale > 0.0) {
        entry.max_relative_error = std::max(entry.max_relative_error, std::abs(s.analytic - s.central) / scale);
      }
    }
    entry.passed = entry.checked > 0 && entry.checked >= entry.skipped_nonsmooth && entry.max_relative_error < options.tolerance;
    report.entries.push_back(entry);
  }
  return report;
}

template GradCheckReport grad_check<float>(const GraphBuilder<float>&, std::span<const GradCheckInput<float>>,
                                           const GradCheckOptions&);
template GradCheckReport grad_check<double>(const GraphBuilder<double>&, std::span<const GradCheckInput<double>>,
                                            const GradCheckOptions&);

}  // namespace terragan
