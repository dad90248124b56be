#include "terragan/core/functional.hpp"

#include <cmath>

#include "kernels.hpp"
#include "terragan/core/errors.hpp"

namespace terragan {

namespace {

template <typename Real>
void add_bias(BasicTensor<Real>& out, const BasicTensor<Real>& bias) {
  if (bias.empty()) return;
  const auto channels = out.dim(1);
  if (bias.numel() != static_cast<std::size_t>(channels)) {
    throw ShapeError("bias " + shape_string(bias.shape()) + " does not match " + std::to_string(channels) +
                     " output channels");
  }
  const auto plane = out.dim(2) * out.dim(3);
  Real* p = out.data();
  for (std::int64_t b = 0; b < out.dim(0); ++b) {
    for (std::int64_t c = 0; c < channels; ++c) {
      const Real v = bias[static_cast<std::size_t>(c)];
      for (std::int64_t i = 0; i < plane; ++i) *p++ += v;
    }
  }
}

}  // namespace

Activation Activation::leaky_relu(double slope) {
  if (!(slope > 0.0 && slope < 1.0)) throw ContractError("leaky_relu slope must lie in (0,1)");
  return {Kind::leaky_relu, slope};
}

template <typename Real>
BasicTensor<Real> conv2d(const BasicTensor<Real>& input, const BasicTensor<Real>& kernel,
                         const BasicTensor<Real>& bias, ConvGeometry geometry) {
  const auto d = kernels::conv_dims(input.shape(), kernel.shape(), geometry);
  BasicTensor<Real> out({d.batch, d.out_channels, d.out_h, d.out_w});
  std::vector<Real> columns(static_cast<std::size_t>(d.col_rows() * d.col_cols()));
  const auto in_stride = d.in_channels * d.in_h * d.in_w;
  const auto out_stride = d.out_channels * d.col_cols();
  for (std::int64_t b = 0; b < d.batch; ++b) {
    kernels::im2col(d, input.data() + b * in_stride, columns.data());
    kernels::gemm_nn(d.out_channels, d.col_cols(), d.col_rows(), kernel.data(), columns.data(),
                     out.data() + b * out_stride);
  }
  add_bias(out, bias);
  return out;
}

template <typename Real>
BasicTensor<Real> conv2d_transpose(const BasicTensor<Real>& input, const BasicTensor<Real>& kernel,
                                   const BasicTensor<Real>& bias, ConvGeometry geometry) {
  const auto d = kernels::transpose_dims(input.shape(), kernel.shape(), geometry);
  BasicTensor<Real> out({d.batch, d.in_channels, d.in_h, d.in_w});
  std::vector<Real> columns(static_cast<std::size_t>(d.col_rows() * d.col_cols()));
  const auto small_stride = d.out_channels * d.col_cols();
  const auto large_stride = d.in_channels * d.in_h * d.in_w;
  for (std::int64_t b = 0; b < d.batch; ++b) {
    std::fill(columns.begin(), columns.end(), Real(0));
    kernels::gemm_tn(d.col_rows(), d.col_cols(), d.out_channels, kernel.data(),
                     input.data() + b * small_stride, columns.data());
    kernels::col2im(d, columns.data(), out.data() + b * large_stride);
  }
  add_bias(out, bias);
  return out;
}

template <typename Real>
BasicTensor<Real> resample(const BasicTensor<Real>& input, ResampleMode mode) {
  if (input.rank() != 4) throw ShapeError("resample expects [B,C,H,W], got " + shape_string(input.shape()));
  const auto planes = input.dim(0) * input.dim(1);
  const auto h = input.dim(2);
  const auto w = input.dim(3);
  if (mode == ResampleMode::up2_nearest) {
    BasicTensor<Real> out({input.dim(0), input.dim(1), 2 * h, 2 * w});
    for (std::int64_t p = 0; p < planes; ++p) {
      const Real* src = input.data() + p * h * w;
      Real* dst = out.data() + p * 4 * h * w;
      for (std::int64_t i = 0; i < 2 * h; ++i) {
        for (std::int64_t j = 0; j < 2 * w; ++j) dst[i * 2 * w + j] = src[(i / 2) * w + j / 2];
      }
    }
    return out;
  }
  if (h % 2 != 0 || w % 2 != 0) {
    throw ShapeError("down2_average requires even extents, got " + shape_string(input.shape()));
  }
  BasicTensor<Real> out({input.dim(0), input.dim(1), h / 2, w / 2});
  for (std::int64_t p = 0; p < planes; ++p) {
    const Real* src = input.data() + p * h * w;
    Real* dst = out.data() + p * (h / 2) * (w / 2);
    for (std::int64_t i = 0; i < h / 2; ++i) {
      for (std::int64_t j = 0; j < w / 2; ++j) {
        const Real* a = src + (2 * i) * w + 2 * j;
        dst[i * (w / 2) + j] = ((a[0] + a[1]) + (a[w] + a[w + 1])) * Real(0.25);
      }
    }
  }
  return out;
}

template <typename Real>
BasicTensor<Real> activation(const BasicTensor<Real>& input, Activation act) {
  BasicTensor<Real> out = input;
  switch (act.kind) {
    case Activation::Kind::leaky_relu: {
      const Real slope = static_cast<Real>(act.slope);
      for (auto& v : out.values()) v = v > Real(0) ? v : slope * v;
      break;
    }
    case Activation::Kind::tanh:
      for (auto& v : out.values()) v = std::tanh(v);
      break;
    case Activation::Kind::sigmoid:
      for (auto& v : out.values()) v = Real(1) / (Real(1) + std::exp(-v));
      break;
  }
  return out;
}

template <typename Real>
BasicTensor<Real> concat_channels(const BasicTensor<Real>& a, const BasicTensor<Real>& b) {
  if (a.rank() != 4 || b.rank() != 4 || a.dim(0) != b.dim(0) || a.dim(2) != b.dim(2) ||
      a.dim(3) != b.dim(3)) {
    throw ShapeError("concat_channels mismatch: " + shape_string(a.shape()) + " and " +
                     shape_string(b.shape()));
  }
  const auto batch = a.dim(0);
  const auto plane = a.dim(2) * a.dim(3);
  const auto a_size = a.dim(1) * plane;
  const auto b_size = b.dim(1) * plane;
  BasicTensor<Real> out({batch, a.dim(1) + b.dim(1), a.dim(2), a.dim(3)});
  Real* dst = out.data();
  for (std::int64_t n = 0; n < batch; ++n) {
    dst = std::copy(a.data() + n * a_size, a.data() + (n + 1) * a_size, dst);
    dst = std::copy(b.data() + n * b_size, b.data() + (n + 1) * b_size, dst);
  }
  return out;
}

template <typename Real>
Real reduce_mean(const BasicTensor<Real>& input) {
  if (input.empty()) throw ShapeError("reduce_mean of an empty tensor");
  double sum = 0.0;
  for (Real v : input.values()) sum += static_cast<double>(v);
  return static_cast<Real>(sum / static_cast<double>(input.numel()));
}

#define TERRAGAN_INSTANTIATE(Real)                                                                  \
  template BasicTensor<Real> conv2d<Real>(const BasicTensor<Real>&, const BasicTensor<Real>&,       \
                                          const BasicTensor<Real>&, ConvGeometry);                  \
  template BasicTensor<Real> conv2d_transpose<Real>(const BasicTensor<Real>&, const BasicTensor<Real>&, \
                                                    const BasicTensor<Real>&, ConvGeometry);        \
  template BasicTensor<Real> resample<Real>(const BasicTensor<Real>&, ResampleMode);                \
  template BasicTensor<Real> activation<Real>(const BasicTensor<Real>&, Activation);                \
  template BasicTensor<Real> concat_channels<Real>(const BasicTensor<Real>&, const BasicTensor<Real>&); \
  template Real reduce_mean<Real>(const BasicTensor<Real>&);

TERRAGAN_INSTANTIATE(float)
TERRAGAN_INSTANTIATE(double)
#undef TERRAGAN_INSTANTIATE

}  // namespace terragan
