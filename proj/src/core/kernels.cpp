#include "kernels.hpp"

#include <algorithm>
#include <vector>

#include "terragan/core/errors.hpp"

namespace terragan::kernels {

ConvDims conv_dims(const Shape& input, const Shape& kernel, ConvGeometry g) {
  if (input.size() != 4 || kernel.size() != 4) {
    throw ShapeError("conv2d expects rank-4 input and kernel, got " + shape_string(input) + " and " +
                     shape_string(kernel));
  }
  if (g.stride < 1 || g.padding < 0) throw ContractError("conv2d requires stride >= 1 and padding >= 0");
  if (input[1] != kernel[1]) {
    throw ShapeError("conv2d channel mismatch: input " + shape_string(input) + ", kernel " +
                     shape_string(kernel));
  }
  ConvDims d{};
  d.batch = input[0];
  d.in_channels = input[1];
  d.in_h = input[2];
  d.in_w = input[3];
  d.out_channels = kernel[0];
  d.kernel_h = kernel[2];
  d.kernel_w = kernel[3];
  d.stride = g.stride;
  d.padding = g.padding;
  if (d.kernel_h > d.in_h + 2 * g.padding || d.kernel_w > d.in_w + 2 * g.padding) {
    throw ShapeError("conv2d kernel " + shape_string(kernel) + " larger than padded input " +
                     shape_string(input));
  }
  d.out_h = (d.in_h + 2 * g.padding - d.kernel_h) / g.stride + 1;
  d.out_w = (d.in_w + 2 * g.padding - d.kernel_w) / g.stride + 1;
  return d;
}

ConvDims transpose_dims(const Shape& input, const Shape& kernel, ConvGeometry g) {
  if (input.size() != 4 || kernel.size() != 4) {
    throw ShapeError("conv2d_transpose expects rank-4 input and kernel, got " + shape_string(input) +
                     " and " + shape_string(kernel));
  }
  if (g.stride < 1 || g.padding < 0) {
    throw ContractError("conv2d_transpose requires stride >= 1 and padding >= 0");
  }
  if (input[1] != kernel[0]) {
    throw ShapeError("conv2d_transpose channel mismatch: input " + shape_string(input) + ", kernel " +
                     shape_string(kernel));
  }
  ConvDims d{};
  d.batch = input[0];
  d.out_channels = kernel[0];
  d.out_h = input[2];
  d.out_w = input[3];
  d.in_channels = kernel[1];
  d.kernel_h = kernel[2];
  d.kernel_w = kernel[3];
  d.stride = g.stride;
  d.padding = g.padding;
  d.in_h = (d.out_h - 1) * g.stride - 2 * g.padding + d.kernel_h;
  d.in_w = (d.out_w - 1) * g.stride - 2 * g.padding + d.kernel_w;
  if (d.in_h < 1 || d.in_w < 1) {
    throw ShapeError("conv2d_transpose output would be empty for input " + shape_string(input));
  }
  return d;
}

template <typename Real>
void gemm_nn(std::int64_t m, std::int64_t n, std::int64_t k, const Real* a, const Real* b, Real* c) {
  for (std::int64_t i = 0; i < m; ++i) {
    Real* c_row = c + i * n;
    for (std::int64_t p = 0; p < k; ++p) {
      const Real scale = a[i * k + p];
      if (scale == Real(0)) continue;
      const Real* b_row = b + p * n;
      for (std::int64_t j = 0; j < n; ++j) c_row[j] += scale * b_row[j];
    }
  }
}

template <typename Real>
void gemm_nt(std::int64_t m, std::int64_t n, std::int64_t k, const Real* a, const Real* b, Real* c) {
  // Transposing B keeps the inner loop a contiguous axpy.
  std::vector<Real> bt(static_cast<std::size_t>(k * n));
  for (std::int64_t j = 0; j < n; ++j) {
    for (std::int64_t p = 0; p < k; ++p) bt[p * n + j] = b[j * k + p];
  }
  gemm_nn(m, n, k, a, bt.data(), c);
}

template <typename Real>
void gemm_tn(std::int64_t m, std::int64_t n, std::int64_t k, const Real* a, const Real* b, Real* c) {
  for (std::int64_t p = 0; p < k; ++p) {
    const Real* b_row = b + p * n;
    for (std::int64_t i = 0; i < m; ++i) {
      const Real scale = a[p * m + i];
      if (scale == Real(0)) continue;
      Real* c_row = c + i * n;
      for (std::int64_t j = 0; j < n; ++j) c_row[j] += scale * b_row[j];
    }
  }
}

template <typename Real>
void im2col(const ConvDims& d, const Real* image, Real* columns) {
  const auto cols = d.col_cols();
  for (std::int64_t c = 0; c < d.in_channels; ++c) {
    const Real* plane = image + c * d.in_h * d.in_w;
    for (std::int64_t ki = 0; ki < d.kernel_h; ++ki) {
      for (std::int64_t kj = 0; kj < d.kernel_w; ++kj) {
        Real* row = columns + ((c * d.kernel_h + ki) * d.kernel_w + kj) * cols;
        for (std::int64_t oh = 0; oh < d.out_h; ++oh) {
          const std::int64_t ih = oh * d.stride - d.padding + ki;
          Real* out = row + oh * d.out_w;
          if (ih < 0 || ih >= d.in_h) {
            std::fill(out, out + d.out_w, Real(0));
            continue;
          }
          const Real* in_row = plane + ih * d.in_w;
          for (std::int64_t ow = 0; ow < d.out_w; ++ow) {
            const std::int64_t iw = ow * d.stride - d.padding + kj;
            out[ow] = (iw >= 0 && iw < d.in_w) ? in_row[iw] : Real(0);
          }
        }
      }
    }
  }
}

template <typename Real>
void col2im(const ConvDims& d, const Real* columns, Real* image) {
  const auto cols = d.col_cols();
  for (std::int64_t c = 0; c < d.in_channels; ++c) {
    Real* plane = image + c * d.in_h * d.in_w;
    for (std::int64_t ki = 0; ki < d.kernel_h; ++ki) {
      for (std::int64_t kj = 0; kj < d.kernel_w; ++kj) {
        const Real* row = columns + ((c * d.kernel_h + ki) * d.kernel_w + kj) * cols;
        for (std::int64_t oh = 0; oh < d.out_h; ++oh) {
          const std::int64_t ih = oh * d.stride - d.padding + ki;
          if (ih < 0 || ih >= d.in_h) continue;
          Real* in_row = plane + ih * d.in_w;
          const Real* src = row + oh * d.out_w;
          for (std::int64_t ow = 0; ow < d.out_w; ++ow) {
            const std::int64_t iw = ow * d.stride - d.padding + kj;
            if (iw >= 0 && iw < d.in_w) in_row[iw] += src[ow];
          }
        }
      }
    }
  }
}

template <typename Real>
void conv2d_backward(const ConvDims& d, const Real* input, const Real* kernel, const Real* grad_out,
                     Real* grad_input, Real* grad_kernel, Real* grad_bias) {
  const auto rows = d.col_rows();
  const auto cols = d.col_cols();
  const auto in_stride = d.in_channels * d.in_h * d.in_w;
  const auto out_stride = d.out_channels * cols;
  std::vector<Real> columns(static_cast<std::size_t>(rows * cols));
  for (std::int64_t b = 0; b < d.batch; ++b) {
    const Real* g = grad_out + b * out_stride;
    if (grad_kernel) {
      im2col(d, input + b * in_stride, columns.data());
      gemm_nt(d.out_channels, rows, cols, g, columns.data(), grad_kernel);
    }
    if (grad_input) {
      std::fill(columns.begin(), columns.end(), Real(0));
      gemm_tn(rows, cols, d.out_channels, kernel, g, columns.data());
      col2im(d, columns.data(), grad_input + b * in_stride);
    }
    if (grad_bias) {
      for (std::int64_t c = 0; c < d.out_channels; ++c) {
        Real sum = 0;
        for (std::int64_t i = 0; i < cols; ++i) sum += g[c * cols + i];
        grad_bias[c] += sum;
      }
    }
  }
}

template <typename Real>
void conv2d_transpose_backward(const ConvDims& d, const Real* input, const Real* kernel,
                               const Real* grad_out, Real* grad_input, Real* grad_kernel,
                               Real* grad_bias) {
  // Here `input` is the transposed input (d.out_* geometry) and grad_out has
  // the d.in_* geometry.
  const auto rows = d.col_rows();
  const auto cols = d.col_cols();
  const auto small_stride = d.out_channels * cols;
  const auto large_plane = d.in_h * d.in_w;
  const auto large_stride = d.in_channels * large_plane;
  std::vector<Real> columns(static_cast<std::size_t>(rows * cols));
  for (std::int64_t b = 0; b < d.batch; ++b) {
    const Real* g = grad_out + b * large_stride;
    if (grad_input || grad_kernel) im2col(d, g, columns.data());
    if (grad_input) gemm_nn(d.out_channels, cols, rows, kernel, columns.data(), grad_input + b * small_stride);
    if (grad_kernel) gemm_nt(d.out_channels, rows, cols, input + b * small_stride, columns.data(), grad_kernel);
    if (grad_bias) {
      for (std::int64_t c = 0; c < d.in_channels; ++c) {
        Real sum = 0;
        for (std::int64_t i = 0; i < large_plane; ++i) sum += g[c * large_plane + i];
        grad_bias[c] += sum;
      }
    }
  }
}

#define TERRAGAN_INSTANTIATE(Real)                                                                   \
  template void gemm_nn<Real>(std::int64_t, std::int64_t, std::int64_t, const Real*, const Real*, Real*); \
  template void gemm_nt<Real>(std::int64_t, std::int64_t, std::int64_t, const Real*, const Real*, Real*); \
  template void gemm_tn<Real>(std::int64_t, std::int64_t, std::int64_t, const Real*, const Real*, Real*); \
  template void im2col<Real>(const ConvDims&, const Real*, Real*);                                   \
  template void col2im<Real>(const ConvDims&, const Real*, Real*);                                   \
  template void conv2d_backward<Real>(const ConvDims&, const Real*, const Real*, const Real*, Real*,  \
                                      Real*, Real*);                                                 \
  template void conv2d_transpose_backward<Real>(const ConvDims&, const Real*, const Real*,           \
                                                const Real*, Real*, Real*, Real*);

TERRAGAN_INSTANTIATE(float)
TERRAGAN_INSTANTIATE(double)
#undef TERRAGAN_INSTANTIATE

}  // namespace terragan::kernels
