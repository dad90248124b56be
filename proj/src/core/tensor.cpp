#include "terragan/core/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "terragan/core/errors.hpp"

namespace terragan {

std::size_t shape_numel(const Shape& shape) {
  if (shape.empty()) throw ShapeError("empty shape");
  std::size_t n = 1;
  for (auto extent : shape) {
    if (extent < 1) throw ShapeError("invalid extent in shape " + shape_string(shape));
    n *= static_cast<std::size_t>(extent);
  }
  return n;
}

std::string shape_string(const Shape& shape) {
  std::ostringstream out;
  out << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out << ',';
    out << shape[i];
  }
  out << ']';
  return out.str();
}

template <typename Real>
BasicTensor<Real>::BasicTensor(Shape shape, Real fill)
    : shape_(std::move(shape)), data_(shape_numel(shape_), fill) {}

template <typename Real>
BasicTensor<Real>::BasicTensor(Shape shape, std::vector<Real> values)
    : shape_(std::move(shape)), data_(std::move(values)) {
  if (shape_numel(shape_) != data_.size()) {
    throw ShapeError("value count " + std::to_string(data_.size()) + " does not match shape " +
                     shape_string(shape_));
  }
}

template <typename Real>
std::int64_t BasicTensor<Real>::dim(std::size_t axis) const {
  if (axis >= shape_.size()) throw ShapeError("axis out of range for shape " + shape_string(shape_));
  return shape_[axis];
}

template <typename Real>
Real& BasicTensor<Real>::at(std::int64_t b, std::int64_t c, std::int64_t h, std::int64_t w) {
  return data_[static_cast<std::size_t>(((b * shape_[1] + c) * shape_[2] + h) * shape_[3] + w)];
}

template <typename Real>
Real BasicTensor<Real>::at(std::int64_t b, std::int64_t c, std::int64_t h, std::int64_t w) const {
  return data_[static_cast<std::size_t>(((b * shape_[1] + c) * shape_[2] + h) * shape_[3] + w)];
}

template <typename Real>
BasicTensor<Real> BasicTensor<Real>::reshaped(Shape shape) const& {
  return BasicTensor(std::move(shape), data_);
}

template <typename Real>
BasicTensor<Real> BasicTensor<Real>::reshaped(Shape shape) && {
  return BasicTensor(std::move(shape), std::move(data_));
}

template <typename Real>
void BasicTensor<Real>::fill(Real value) noexcept {
  std::fill(data_.begin(), data_.end(), value);
}

template <typename Real>
BasicTensor<Real> randn(Shape shape, double mean, double stddev, Rng& rng) {
  BasicTensor<Real> out(std::move(shape));
  for (auto& v : out.values()) v = static_cast<Real>(rng.normal(mean, stddev));
  return out;
}

template <typename Real>
BasicTensor<Real> rand_uniform(Shape shape, double lo, double hi, Rng& rng) {
  BasicTensor<Real> out(std::move(shape));
  for (auto& v : out.values()) v = static_cast<Real>(rng.uniform(lo, hi));
  return out;
}

template <typename Real>
BasicTensor<Real> slice_channels(const BasicTensor<Real>& x, std::int64_t begin, std::int64_t end) {
  if (x.rank() != 4 || begin < 0 || end > x.dim(1) || begin >= end) {
    throw ShapeError("invalid channel slice of " + shape_string(x.shape()));
  }
  const auto batch = x.dim(0);
  const auto plane = x.dim(2) * x.dim(3);
  BasicTensor<Real> out({batch, end - begin, x.dim(2), x.dim(3)});
  for (std::int64_t b = 0; b < batch; ++b) {
    const Real* src = x.data() + (b * x.dim(1) + begin) * plane;
    std::copy(src, src + (end - begin) * plane, out.data() + b * (end - begin) * plane);
  }
  return out;
}

template <typename Real>
BasicTensor<Real> batch_item(const BasicTensor<Real>& x, std::int64_t index) {
  if (x.rank() < 2 || index < 0 || index >= x.dim(0)) {
    throw ShapeError("batch index out of range for " + shape_string(x.shape()));
  }
  Shape shape = x.shape();
  shape[0] = 1;
  const auto stride = x.numel() / static_cast<std::size_t>(x.dim(0));
  std::vector<Real> values(x.data() + index * stride, x.data() + (index + 1) * stride);
  return BasicTensor<Real>(std::move(shape), std::move(values));
}

template <typename Real>
BasicTensor<Real> stack(std::span<const BasicTensor<Real>> items) {
  if (items.empty()) throw ShapeError("cannot stack zero tensors");
  Shape shape{static_cast<std::int64_t>(items.size())};
  shape.insert(shape.end(), items[0].shape().begin(), items[0].shape().end());
  std::vector<Real> values;
  values.reserve(items.size() * items[0].numel());
  for (const auto& item : items) {
    if (item.shape() != items[0].shape()) {
      throw ShapeError("stack of mismatched shapes " + shape_string(items[0].shape()) + " and " +
                       shape_string(item.shape()));
    }
    values.insert(values.end(), item.values().begin(), item.values().end());
  }
  return BasicTensor<Real>(std::move(shape), std::move(values));
}

template <typename Real>
double max_abs_diff(const BasicTensor<Real>& a, const BasicTensor<Real>& b) {
  if (a.shape() != b.shape()) throw ShapeError("max_abs_diff shape mismatch");
  double worst = 0.0;
  for (std::size_t i = 0; i < a.numel(); ++i) {
    worst = std::max(worst, std::abs(static_cast<double>(a[i]) - static_cast<double>(b[i])));
  }
  return worst;
}

template <typename Real>
double dot(const BasicTensor<Real>& a, const BasicTensor<Real>& b) {
  if (a.numel() != b.numel()) throw ShapeError("dot size mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.numel(); ++i) sum += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  return sum;
}

template <typename Real>
bool all_finite(const BasicTensor<Real>& x) {
  return std::all_of(x.values().begin(), x.values().end(), [](Real v) { return std::isfinite(v); });
}

#define TERRAGAN_INSTANTIATE(Real)                                                                  \
  template class BasicTensor<Real>;                                                                 \
  template BasicTensor<Real> randn<Real>(Shape, double, double, Rng&);                              \
  template BasicTensor<Real> rand_uniform<Real>(Shape, double, double, Rng&);                       \
  template BasicTensor<Real> slice_channels<Real>(const BasicTensor<Real>&, std::int64_t, std::int64_t); \
  template BasicTensor<Real> batch_item<Real>(const BasicTensor<Real>&, std::int64_t);              \
  template BasicTensor<Real> stack<Real>(std::span<const BasicTensor<Real>>);                       \
  template double max_abs_diff<Real>(const BasicTensor<Real>&, const BasicTensor<Real>&);           \
  template double dot<Real>(const BasicTensor<Real>&, const BasicTensor<Real>&);                    \
  template bool all_finite<Real>(const BasicTensor<Real>&);

TERRAGAN_INSTANTIATE(float)
TERRAGAN_INSTANTIATE(double)
#undef TERRAGAN_INSTANTIATE

}  // namespace terragan
