#include "terragan/core/verify.hpp"

#include <algorithm>
#include <functional>

#include "terragan/core/grad_check.hpp"

namespace terragan {

bool VerificationReport::passed() const {
  return !results.empty() && std::all_of(results.begin(), results.end(), [](const auto& r) { return r.ok(); });
}

namespace {

template <typename Real>
struct Instance {
  std::vector<GradCheckInput<Real>> inputs;
  std::function<Var<Real>(Tape<Real>&, std::span<const Var<Real>>)> op;
};

template <typename Real>
using Maker = std::function<Instance<Real>(Rng&)>;

std::int64_t pick(Rng& rng, std::int64_t lo, std::int64_t hi) {
  return lo + static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(hi - lo + 1)));
}

template <typename Real>
BasicTensor<Real> uniform(Shape s, Rng& rng, double lo = -1.0, double hi = 1.0) {
  return rand_uniform<Real>(std::move(s), lo, hi, rng);
}

template <typename Real>
std::vector<std::pair<std::string, Maker<Real>>> makers() {
  std::vector<std::pair<std::string, Maker<Real>>> m;
  m.emplace_back("conv2d", [](Rng& rng) {
    const auto b = pick(rng, 1, 2), cin = pick(rng, 1, 3), cout = pick(rng, 1, 3), k = pick(rng, 1, 3);
    const ConvGeometry g{pick(rng, 1, 2), pick(rng, 0, 1)};
    const auto h = pick(rng, k, 6), w = pick(rng, k, 6);
    return Instance<Real>{{{"input", uniform<Real>({b, cin, h, w}, rng)},
                           {"kernel", uniform<Real>({cout, cin, k, k}, rng)},
                           {"bias", uniform<Real>({cout}, rng)}},
                          [g](Tape<Real>&, std::span<const Var<Real>> v) { return conv2d(v[0], v[1], v[2], g); }};
  });
  m.emplace_back("conv2d_transpose", [](Rng& rng) {
    const auto b = pick(rng, 1, 2), cin = pick(rng, 1, 3), cout = pick(rng, 1, 3), k = pick(rng, 2, 4);
    const ConvGeometry g{pick(rng, 1, 2), pick(rng, 0, 1)};
    const auto h = pick(rng, 2, 5), w = pick(rng, 2, 5);
    return Instance<Real>{{{"input", uniform<Real>({b, cin, h, w}, rng)},
                           {"kernel", uniform<Real>({cin, cout, k, k}, rng)},
                           {"bias", uniform<Real>({cout}, rng)}},
                          [g](Tape<Real>&, std::span<const Var<Real>> v) {
                            return conv2d_transpose(v[0], v[1], v[2], g);
                          }};
  });
  m.emplace_back("resample_up2", [](Rng& rng) {
    return Instance<Real>{{{"input", uniform<Real>({pick(rng, 1, 2), pick(rng, 1, 3), pick(rng, 1, 4), pick(rng, 1, 4)}, rng)}},
                          [](Tape<Real>&, std::span<const Var<Real>> v) {
                            return resample(v[0], ResampleMode::up2_nearest);
                          }};
  });
  m.emplace_back("resample_down2", [](Rng& rng) {
    return Instance<Real>{
        {{"input", uniform<Real>({pick(rng, 1, 2), pick(rng, 1, 3), 2 * pick(rng, 1, 3), 2 * pick(rng, 1, 3)}, rng)}},
        [](Tape<Real>&, std::span<const Var<Real>> v) { return resample(v[0], ResampleMode::down2_average); }};
  });
  const std::pair<const char*, Activation> acts[] = {{"leaky_relu", Activation::leaky_relu(0.2)},
                                                     {"tanh", Activation::tanh()},
                                                     {"sigmoid", Activation::sigmoid()}};
  for (const auto& [name, act] : acts) {
    m.emplace_back(name, [act](Rng& rng) {
      return Instance<Real>{{{"input", uniform<Real>({pick(rng, 1, 2), pick(rng, 1, 3), pick(rng, 1, 4), pick(rng, 1, 4)}, rng, -2.0, 2.0)}},
                            [act](Tape<Real>&, std::span<const Var<Real>> v) { return activation(v[0], act); }};
    });
  }
  m.emplace_back("concat_channels", [](Rng& rng) {
    const auto b = pick(rng, 1, 2), h = pick(rng, 1, 4), w = pick(rng, 1, 4);
    return Instance<Real>{{{"a", uniform<Real>({b, pick(rng, 1, 3), h, w}, rng)}, {"b", uniform<Real>({b, pick(rng, 1, 3), h, w}, rng)}},
                          [](Tape<Real>&, std::span<const Var<Real>> v) { return concat_channels(v[0], v[1]); }};
  });
  m.emplace_back("reduce_mean", [](Rng& rng) {
    return Instance<Real>{{{"input", uniform<Real>({pick(rng, 1, 3), pick(rng, 1, 5)}, rng)}},
                          [](Tape<Real>&, std::span<const Var<Real>> v) { return reduce_mean(v[0]); }};
  });
  auto binary = [&m](const char* name, std::function<Var<Real>(Var<Real>, Var<Real>)> f) {
    m.emplace_back(name, [f](Rng& rng) {
      const Shape s{pick(rng, 1, 3), pick(rng, 1, 4)};
      return Instance<Real>{{{"a", uniform<Real>(s, rng)}, {"b", uniform<Real>(s, rng)}},
                            [f](Tape<Real>&, std::span<const Var<Real>> v) { return f(v[0], v[1]); }};
    });
  };
  binary("add", [](Var<Real> a, Var<Real> b) { return add(a, b); });
  binary("sub", [](Var<Real> a, Var<Real> b) { return sub(a, b); });
  binary("mul", [](Var<Real> a, Var<Real> b) { return mul(a, b); });
  binary("lerp", [](Var<Real> a, Var<Real> b) { return lerp(a, b, 0.3); });
  m.emplace_back("scale_by", [](Rng& rng) {
    // The scalar's gradient is a full reduction over x; a sign-coherent x keeps
    // it away from zero, where 32-bit differences cannot resolve it.
    return Instance<Real>{{{"scalar", uniform<Real>({1}, rng)},
                           {"x", uniform<Real>({pick(rng, 1, 3), pick(rng, 1, 4)}, rng, 0.1, 1.0)}},
                          [](Tape<Real>&, std::span<const Var<Real>> v) { return scale_by(v[0], v[1]); }};
  });
  m.emplace_back("affine", [](Rng& rng) {
    return Instance<Real>{{{"x", uniform<Real>({pick(rng, 1, 3), pick(rng, 1, 4)}, rng)}},
                          [](Tape<Real>&, std::span<const Var<Real>> v) { return affine(v[0], -1.7, 0.4); }};
  });
  m.emplace_back("log_clamped", [](Rng& rng) {
    return Instance<Real>{{{"x", uniform<Real>({pick(rng, 1, 3), pick(rng, 1, 4)}, rng, 0.05, 0.95)}},
                          [](Tape<Real>&, std::span<const Var<Real>> v) { return log_clamped(v[0], 1e-7); }};
  });
  m.emplace_back("abs", [](Rng& rng) {
    return Instance<Real>{{{"x", uniform<Real>({pick(rng, 1, 3), pick(rng, 1, 4)}, rng)}},
                          [](Tape<Real>&, std::span<const Var<Real>> v) { return abs(v[0]); }};
  });
  m.emplace_back("reshape", [](Rng& rng) {
    const auto a = pick(rng, 1, 3), b = pick(rng, 1, 4);
    return Instance<Real>{{{"x", uniform<Real>({a, b}, rng)}},
                          [a, b](Tape<Real>&, std::span<const Var<Real>> v) { return reshape(v[0], {b, a}); }};
  });
  return m;
}

template <typename Real>
void run_precision(int instances, std::uint64_t seed, const char* precision, double tolerance, double step,
                   VerificationReport& report) {
  Rng root(seed);
  std::uint64_t stream = 0;
  for (const auto& [name, make] : makers<Real>()) {
    OpCheckResult result{name, precision, 0, 0, 0.0, tolerance, 0, 0};
    for (int i = 0; i < instances; ++i) {
      Rng rng = root.fork(++stream);
      auto inst = make(rng);
      // Random linear probe of the output, measured against the unperturbed
      // output so untouched elements cancel exactly and 32-bit rounding of the
      // loss does not swamp the central differences.
      BasicTensor<Real> reference;
      {
        Tape<Real> tape(false);
        std::vector<Var<Real>> vars;
        for (const auto& in : inst.inputs) vars.push_back(tape.constant(in.value));
        reference = tape.value(inst.op(tape, vars));
      }
      const auto probe = uniform<Real>(reference.shape(), rng, 0.5, 1.5);
      GraphBuilder<Real> build = [&](Tape<Real>& tape, std::span<const Var<Real>> v) {
        auto y = sub(inst.op(tape, v), tape.constant(reference));
        return reduce_mean(mul(y, tape.constant(probe)));
      };
      GradCheckOptions options;
      options.tolerance = tolerance;
      options.step = step;
      options.subsample_seed = stream;
      const auto r = grad_check<Real>(build, inst.inputs, options);
      ++result.instances;
      if (r.passed()) ++result.passed;
      result.worst = std::max(result.worst, r.worst());
      for (const auto& e : r.entries) {
        result.checked += e.checked;
        result.skipped_nonsmooth += e.skipped_nonsmooth;
      }
    }
    report.results.push_back(result);
  }
}

}  // namespace

VerificationReport run_gradient_suite(int instances, std::uint64_t seed) {
  VerificationReport report;
  run_precision<float>(instances, seed, "float32", 1e-3, 1e-3, report);
  run_precision<double>(instances, seed, "float64", 1e-6, 1e-5, report);
  return report;
}

}  // namespace terragan
