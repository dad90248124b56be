#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "terragan/core/functional.hpp"
#include "terragan/core/tensor.hpp"

namespace terragan {

template <typename Real>
class Tape;

/// Handle to a value recorded on a tape. Cheap to copy; valid while the tape lives.
template <typename Real>
struct Var {
  Tape<Real>* tape = nullptr;
  std::uint32_t id = 0;

  const BasicTensor<Real>& value() const { return tape->value(*this); }
  const Shape& shape() const { return value().shape(); }
};

/// Trainable tensor plus its gradient and optimizer moment buffers.
template <typename Real>
struct Parameter {
  BasicTensor<Real> value;
  BasicTensor<Real> grad;
  BasicTensor<Real> first_moment;
  BasicTensor<Real> second_moment;
  std::int64_t steps = 0;
  bool grad_ready = false;

  Parameter() = default;
  explicit Parameter(BasicTensor<Real> init)
      : value(std::move(init)),
        grad(value.shape()),
        first_moment(value.shape()),
        second_moment(value.shape()) {}

  void zero_grad() {
    grad.fill(Real(0));
    grad_ready = false;
  }
};

template <typename Real>
struct NamedParameter {
  std::string name;
  Parameter<Real>* parameter;
};

/// Records forward operations and replays their adjoints in reverse.
///
/// Confined to one thread. Each node stores its forward value; gradient
/// buffers are allocated lazily during backward(). Leaves bound to a
/// Parameter push their gradient into Parameter::grad at the end of
/// backward(), so repeated backward() calls accumulate.
template <typename Real>
class Tape {
 public:
  using Backprop = std::function<void(Tape&, std::uint32_t self)>;

  /// With `record_grads` false, parameters enter as constants and no adjoints
  /// are kept (inference mode).
  explicit Tape(bool record_grads = true) : record_grads_(record_grads) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Value that takes no gradient (data, detached activations).
  Var<Real> constant(BasicTensor<Real> value);
  /// Leaf whose gradient is readable through grad() after backward().
  Var<Real> variable(BasicTensor<Real> value);
  Var<Real> parameter(Parameter<Real>& p);

  /// Appends an op node. `backprop` runs only if some input requires grad.
  Var<Real> record(BasicTensor<Real> value, std::initializer_list<Var<Real>> inputs, Backprop backprop);

  const BasicTensor<Real>& value(Var<Real> v) const { return nodes_.at(v.id).value; }
  bool requires_grad(Var<Real> v) const { return nodes_.at(v.id).requires_grad; }
  bool has_grad(Var<Real> v) const { return !nodes_.at(v.id).grad.empty(); }
  /// Gradient of the last backward() with respect to `v`; throws if none reached it.
  const BasicTensor<Real>& grad(Var<Real> v) const;

  /// Zero-initialized on first access.
  BasicTensor<Real>& grad_buffer(std::uint32_t id);

  void backward(Var<Real> loss);

  std::size_t size() const noexcept { return nodes_.size(); }

 private:
  struct Node {
    BasicTensor<Real> value;
    BasicTensor<Real> grad;
    bool requires_grad = false;
    Backprop backprop;
    Parameter<Real>* parameter = nullptr;
  };
  std::vector<Node> nodes_;
  bool record_grads_ = true;
};

// Differentiable operations. All inputs must live on the same tape.

template <typename Real>
Var<Real> conv2d(Var<Real> input, Var<Real> kernel, Var<Real> bias, ConvGeometry geometry);
template <typename Real>
Var<Real> conv2d_transpose(Var<Real> input, Var<Real> kernel, Var<Real> bias, ConvGeometry geometry);
template <typename Real>
Var<Real> resample(Var<Real> input, ResampleMode mode);
template <typename Real>
Var<Real> activation(Var<Real> input, Activation act);
template <typename Real>
Var<Real> concat_channels(Var<Real> a, Var<Real> b);
/// Scalar (shape [1]) mean of every element.
template <typename Real>
Var<Real> reduce_mean(Var<Real> input);

template <typename Real>
Var<Real> add(Var<Real> a, Var<Real> b);
template <typename Real>
Var<Real> sub(Var<Real> a, Var<Real> b);
template <typename Real>
Var<Real> mul(Var<Real> a, Var<Real> b);
/// `scalar` holds exactly one element and multiplies every element of `x`.
template <typename Real>
Var<Real> scale_by(Var<Real> scalar, Var<Real> x);
/// a * x + b with constant coefficients.
template <typename Real>
Var<Real> affine(Var<Real> x, double a, double b);
/// (1 - t) * a + t * b for a constant t.
template <typename Real>
Var<Real> lerp(Var<Real> a, Var<Real> b, double t);
/// log(clamp(x, eps, 1 - eps)); zero gradient where the clamp is active.
template <typename Real>
Var<Real> log_clamped(Var<Real> x, double eps);
template <typename Real>
Var<Real> abs(Var<Real> x);
template <typename Real>
Var<Real> reshape(Var<Real> x, Shape shape);

}  // namespace terragan
