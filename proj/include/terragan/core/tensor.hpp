#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "terragan/core/rng.hpp"

namespace terragan {

/// Extents, outermost first. Images use [batch, channels, height, width].
using Shape = std::vector<std::int64_t>;

/// Element count of `shape`; throws ShapeError on an empty shape or a
/// non-positive extent.
std::size_t shape_numel(const Shape& shape);
std::string shape_string(const Shape& shape);

/// Dense row-major array with value semantics.
template <typename Real>
class BasicTensor {
 public:
  using value_type = Real;

  BasicTensor() = default;
  explicit BasicTensor(Shape shape, Real fill = Real(0));
  BasicTensor(Shape shape, std::vector<Real> values);

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::int64_t dim(std::size_t axis) const;
  std::size_t numel() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  Real* data() noexcept { return data_.data(); }
  const Real* data() const noexcept { return data_.data(); }
  std::span<Real> values() noexcept { return data_; }
  std::span<const Real> values() const noexcept { return data_; }

  Real& operator[](std::size_t i) noexcept { return data_[i]; }
  Real operator[](std::size_t i) const noexcept { return data_[i]; }

  // 4-D accessors for [B, C, H, W] tensors.
  Real& at(std::int64_t b, std::int64_t c, std::int64_t h, std::int64_t w);
  Real at(std::int64_t b, std::int64_t c, std::int64_t h, std::int64_t w) const;

  /// Same values under a new shape with equal element count.
  [[nodiscard]] BasicTensor reshaped(Shape shape) const&;
  [[nodiscard]] BasicTensor reshaped(Shape shape) &&;

  void fill(Real value) noexcept;

  template <typename Other>
  BasicTensor<Other> cast() const {
    std::vector<Other> out(data_.begin(), data_.end());
    return BasicTensor<Other>(shape_, std::move(out));
  }

  bool operator==(const BasicTensor&) const = default;

 private:
  Shape shape_;
  std::vector<Real> data_;
};

using Tensor = BasicTensor<float>;
using Tensor64 = BasicTensor<double>;

template <typename Real>
BasicTensor<Real> zeros(Shape shape) {
  return BasicTensor<Real>(std::move(shape));
}

template <typename Real>
BasicTensor<Real> full(Shape shape, Real value) {
  return BasicTensor<Real>(std::move(shape), value);
}

/// Gaussian fill drawn in element order from `rng`.
template <typename Real>
BasicTensor<Real> randn(Shape shape, double mean, double stddev, Rng& rng);

/// Uniform fill on [lo, hi).
template <typename Real>
BasicTensor<Real> rand_uniform(Shape shape, double lo, double hi, Rng& rng);

/// Channels [begin, end) of a [B, C, H, W] tensor.
template <typename Real>
BasicTensor<Real> slice_channels(const BasicTensor<Real>& x, std::int64_t begin, std::int64_t end);

/// Sample `index` of a batched tensor, keeping a leading batch extent of 1.
template <typename Real>
BasicTensor<Real> batch_item(const BasicTensor<Real>& x, std::int64_t index);

/// Concatenates equally shaped samples along a new leading batch axis.
template <typename Real>
BasicTensor<Real> stack(std::span<const BasicTensor<Real>> items);

template <typename Real>
double max_abs_diff(const BasicTensor<Real>& a, const BasicTensor<Real>& b);

template <typename Real>
double dot(const BasicTensor<Real>& a, const BasicTensor<Real>& b);

template <typename Real>
bool all_finite(const BasicTensor<Real>& x);

}  // namespace terragan
