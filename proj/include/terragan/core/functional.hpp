#pragma once

// Value-level (tape-free) tensor operations. The autograd layer records these
// same kernels, so a forward pass with or without a tape is bit-identical.

#include "terragan/core/tensor.hpp"

namespace terragan {

struct ConvGeometry {
  std::int64_t stride = 1;
  std::int64_t padding = 0;
};

/// Cross-correlation of input [B,Cin,H,W] with kernel [Cout,Cin,Kh,Kw] plus
/// per-channel bias [Cout] (an empty bias tensor means no bias).
template <typename Real>
BasicTensor<Real> conv2d(const BasicTensor<Real>& input, const BasicTensor<Real>& kernel,
                         const BasicTensor<Real>& bias, ConvGeometry geometry);

/// Adjoint of conv2d with respect to its input. `kernel` keeps the conv2d
/// layout [Cout,Cin,Kh,Kw]: the input here has Cout channels and the output
/// Cin channels of spatial size (H-1)*stride - 2*padding + Kh. Bias is [Cin].
template <typename Real>
BasicTensor<Real> conv2d_transpose(const BasicTensor<Real>& input, const BasicTensor<Real>& kernel,
                                   const BasicTensor<Real>& bias, ConvGeometry geometry);

enum class ResampleMode { up2_nearest, down2_average };

template <typename Real>
BasicTensor<Real> resample(const BasicTensor<Real>& input, ResampleMode mode);

struct Activation {
  enum class Kind { leaky_relu, tanh, sigmoid };
  Kind kind = Kind::tanh;
  double slope = 0.2;

  static Activation leaky_relu(double slope);
  static Activation tanh() { return {Kind::tanh, 0.0}; }
  static Activation sigmoid() { return {Kind::sigmoid, 0.0}; }
};

template <typename Real>
BasicTensor<Real> activation(const BasicTensor<Real>& input, Activation act);

template <typename Real>
BasicTensor<Real> concat_channels(const BasicTensor<Real>& a, const BasicTensor<Real>& b);

/// Arithmetic mean of every element, accumulated in double.
template <typename Real>
Real reduce_mean(const BasicTensor<Real>& input);

}  // namespace terragan
