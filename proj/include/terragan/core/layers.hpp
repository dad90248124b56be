#pragma once

#include <memory>
#include <string>
#include <vector>

#include "terragan/core/autograd.hpp"
#include "terragan/core/rng.hpp"

namespace terragan {

/// Kernel init normal(0, 0.02), zero bias.
inline constexpr double kInitStddev = 0.02;

template <typename Real>
struct Conv2dLayer {
  Parameter<Real> weight;
  Parameter<Real> bias;
  ConvGeometry geometry;

  Conv2dLayer(std::int64_t in_channels, std::int64_t out_channels, std::int64_t kernel_size,
              ConvGeometry geometry, Rng& rng);

  Var<Real> operator()(Tape<Real>& tape, Var<Real> x);
  void collect(std::vector<NamedParameter<Real>>& out, const std::string& prefix);
};

/// Transposed convolution; weight layout [in_channels, out_channels, K, K]
/// matching conv2d_transpose.
template <typename Real>
struct ConvTranspose2dLayer {
  Parameter<Real> weight;
  Parameter<Real> bias;
  ConvGeometry geometry;

  ConvTranspose2dLayer(std::int64_t in_channels, std::int64_t out_channels, std::int64_t kernel_size,
                       ConvGeometry geometry, Rng& rng);

  Var<Real> operator()(Tape<Real>& tape, Var<Real> x);
  void collect(std::vector<NamedParameter<Real>>& out, const std::string& prefix);
};

/// A parameterized feed-forward map recorded onto a tape.
template <typename Real>
class Network {
 public:
  virtual ~Network() = default;

  virtual Var<Real> forward(Tape<Real>& tape, Var<Real> input) = 0;
  virtual std::vector<NamedParameter<Real>> named_parameters() = 0;

  std::vector<Parameter<Real>*> parameters();
  std::size_t parameter_count();
  /// Parameters reached by forward() in the network's current state; the
  /// ones an optimizer step should update.
  virtual std::vector<Parameter<Real>*> active_parameters() { return parameters(); }

  /// Forward pass without recording adjoints.
  BasicTensor<Real> infer(const BasicTensor<Real>& input);
};

}  // namespace terragan
