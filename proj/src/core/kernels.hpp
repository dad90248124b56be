#pragma once

// Raw loops shared by the value-level functions and the tape's adjoints.

#include <cstdint>

#include "terragan/core/functional.hpp"

namespace terragan::kernels {

struct ConvDims {
  std::int64_t batch, in_channels, in_h, in_w;
  std::int64_t out_channels, kernel_h, kernel_w;
  std::int64_t stride, padding;
  std::int64_t out_h, out_w;

  std::int64_t col_rows() const { return in_channels * kernel_h * kernel_w; }
  std::int64_t col_cols() const { return out_h * out_w; }
};

/// Dimensions of conv2d(input, kernel); validates channel and extent contracts.
ConvDims conv_dims(const Shape& input, const Shape& kernel, ConvGeometry geometry);

/// Dimensions of the conv2d whose input adjoint is conv2d_transpose(input, kernel):
/// `in_*` describe the transposed output, `out_*` the transposed input.
ConvDims transpose_dims(const Shape& input, const Shape& kernel, ConvGeometry geometry);

// C[M,N] += A[M,K] * B[K,N]
template <typename Real>
void gemm_nn(std::int64_t m, std::int64_t n, std::int64_t k, const Real* a, const Real* b, Real* c);
// C[M,N] += A[M,K] * B[N,K]^T
template <typename Real>
void gemm_nt(std::int64_t m, std::int64_t n, std::int64_t k, const Real* a, const Real* b, Real* c);
// C[M,N] += A[K,M]^T * B[K,N]
template <typename Real>
void gemm_tn(std::int64_t m, std::int64_t n, std::int64_t k, const Real* a, const Real* b, Real* c);

/// One sample [Cin,H,W] -> columns [Cin*Kh*Kw, Ho*Wo]; out-of-bounds taps are zero.
template <typename Real>
void im2col(const ConvDims& d, const Real* image, Real* columns);

/// Scatter-add of columns back onto one sample [Cin,H,W].
template <typename Real>
void col2im(const ConvDims& d, const Real* columns, Real* image);

template <typename Real>
void conv2d_backward(const ConvDims& d, const Real* input, const Real* kernel, const Real* grad_out,
                     Real* grad_input, Real* grad_kernel, Real* grad_bias);

template <typename Real>
void conv2d_transpose_backward(const ConvDims& d, const Real* input, const Real* kernel,
                               const Real* grad_out, Real* grad_input, Real* grad_kernel,
                               Real* grad_bias);

}  // namespace terragan::kernels
