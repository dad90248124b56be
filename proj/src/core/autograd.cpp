#include "terragan/core/autograd.hpp"

#include <cmath>

#include "kernels.hpp"
#include "terragan/core/errors.hpp"

namespace terragan {

template <typename Real>
Var<Real> Tape<Real>::constant(BasicTensor<Real> value) {
  nodes_.push_back(Node{std::move(value), {}, false, {}, nullptr});
  return {this, static_cast<std::uint32_t>(nodes_.size() - 1)};
}

template <typename Real>
Var<Real> Tape<Real>::variable(BasicTensor<Real> value) {
  nodes_.push_back(Node{std::move(value), {}, true, {}, nullptr});
  return {this, static_cast<std::uint32_t>(nodes_.size() - 1)};
}

template <typename Real>
Var<Real> Tape<Real>::parameter(Parameter<Real>& p) {
  if (!record_grads_) return constant(p.value);
  nodes_.push_back(Node{p.value, {}, true, {}, &p});
  return {this, static_cast<std::uint32_t>(nodes_.size() - 1)};
}

template <typename Real>
Var<Real> Tape<Real>::record(BasicTensor<Real> value, std::initializer_list<Var<Real>> inputs,
                             Backprop backprop) {
  bool needs = false;
  for (const auto& in : inputs) {
    if (in.tape != this) throw ContractError("operation mixes values from different tapes");
    needs = needs || nodes_[in.id].requires_grad;
  }
  if (!all_finite(value)) throw ContractError("non-finite value produced by a forward operation");
  nodes_.push_back(Node{std::move(value), {}, needs, needs ? std::move(backprop) : Backprop{}, nullptr});
  return {this, static_cast<std::uint32_t>(nodes_.size() - 1)};
}

template <typename Real>
const BasicTensor<Real>& Tape<Real>::grad(Var<Real> v) const {
  const auto& node = nodes_.at(v.id);
  if (node.grad.empty()) throw ContractError("no gradient reached this value");
  return node.grad;
}

template <typename Real>
BasicTensor<Real>& Tape<Real>::grad_buffer(std::uint32_t id) {
  auto& node = nodes_[id];
  if (node.grad.empty()) node.grad = BasicTensor<Real>(node.value.shape());
  return node.grad;
}

template <typename Real>
void Tape<Real>::backward(Var<Real> loss) {
  if (loss.tape != this) throw ContractError("backward on a value from another tape");
  if (nodes_.at(loss.id).value.numel() != 1) {
    throw ContractError("backward requires a scalar loss, got shape " +
                        shape_string(nodes_[loss.id].value.shape()));
  }
  for (auto& node : nodes_) node.grad = BasicTensor<Real>();
  if (!nodes_[loss.id].requires_grad) return;
  grad_buffer(loss.id)[0] = Real(1);
  for (std::int64_t i = loss.id; i >= 0; --i) {
    auto& node = nodes_[static_cast<std::size_t>(i)];
    if (node.grad.empty()) continue;
    if (node.backprop) node.backprop(*this, static_cast<std::uint32_t>(i));
    if (node.parameter) {
      auto& target = node.parameter->grad;
      if (target.shape() != node.grad.shape()) target = BasicTensor<Real>(node.grad.shape());
      for (std::size_t k = 0; k < target.numel(); ++k) target[k] += node.grad[k];
      node.parameter->grad_ready = true;
    }
  }
}

namespace {

template <typename Real>
Tape<Real>& tape_of(Var<Real> v) {
  if (!v.tape) throw ContractError("operation on an unbound value");
  return *v.tape;
}

template <typename Real>
void require_same_shape(const char* op, Var<Real> a, Var<Real> b) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(op) + " shape mismatch: " + shape_string(a.shape()) + " and " +
                     shape_string(b.shape()));
  }
}

}  // namespace

template <typename Real>
Var<Real> conv2d(Var<Real> input, Var<Real> kernel, Var<Real> bias, ConvGeometry geometry) {
  auto& tape = tape_of(input);
  auto out = conv2d(input.value(), kernel.value(), bias.value(), geometry);
  return tape.record(std::move(out), {input, kernel, bias}, [=](Tape<Real>& t, std::uint32_t self) {
    const auto d = kernels::conv_dims(t.value(input).shape(), t.value(kernel).shape(), geometry);
    Real* gx = t.requires_grad(input) ? t.grad_buffer(input.id).data() : nullptr;
    Real* gk = t.requires_grad(kernel) ? t.grad_buffer(kernel.id).data() : nullptr;
    Real* gb = t.requires_grad(bias) ? t.grad_buffer(bias.id).data() : nullptr;
    kernels::conv2d_backward(d, t.value(input).data(), t.value(kernel).data(), t.grad_buffer(self).data(),
                             gx, gk, gb);
  });
}

template <typename Real>
Var<Real> conv2d_transpose(Var<Real> input, Var<Real> kernel, Var<Real> bias, ConvGeometry geometry) {
  auto& tape = tape_of(input);
  auto out = conv2d_transpose(input.value(), kernel.value(), bias.value(), geometry);
  return tape.record(std::move(out), {input, kernel, bias}, [=](Tape<Real>& t, std::uint32_t self) {
    const auto d = kernels::transpose_dims(t.value(input).shape(), t.value(kernel).shape(), geometry);
    Real* gx = t.requires_grad(input) ? t.grad_buffer(input.id).data() : nullptr;
    Real* gk = t.requires_grad(kernel) ? t.grad_buffer(kernel.id).data() : nullptr;
    Real* gb = t.requires_grad(bias) ? t.grad_buffer(bias.id).data() : nullptr;
    kernels::conv2d_transpose_backward(d, t.value(input).data(), t.value(kernel).data(),
                                       t.grad_buffer(self).data(), gx, gk, gb);
  });
}

template <typename Real>
Var<Real> resample(Var<Real> input, ResampleMode mode) {
  auto& tape = tape_of(input);
  auto out = resample(input.value(), mode);
  return tape.record(std::move(out), {input}, [=](Tape<Real>& t, std::uint32_t self) {
    const auto& g = t.grad_buffer(self);
    auto& gx = t.grad_buffer(input.id);
    const auto planes = gx.dim(0) * gx.dim(1);
    const auto h = gx.dim(2);
    const auto w = gx.dim(3);
    for (std::int64_t p = 0; p < planes; ++p) {
      Real* dst = gx.data() + p * h * w;
      if (mode == ResampleMode::up2_nearest) {
        const Real* src = g.data() + p * 4 * h * w;
        for (std::int64_t i = 0; i < 2 * h; ++i) {
          for (std::int64_t j = 0; j < 2 * w; ++j) dst[(i / 2) * w + j / 2] += src[i * 2 * w + j];
        }
      } else {
        const Real* src = g.data() + p * (h / 2) * (w / 2);
        for (std::int64_t i = 0; i < h; ++i) {
          for (std::int64_t j = 0; j < w; ++j) dst[i * w + j] += Real(0.25) * src[(i / 2) * (w / 2) + j / 2];
        }
      }
    }
  });
}

template <typename Real>
Var<Real> activation(Var<Real> input, Activation act) {
  auto& tape = tape_of(input);
  auto out = activation(input.value(), act);
  return tape.record(std::move(out), {input}, [=](Tape<Real>& t, std::uint32_t self) {
    const auto& x = t.value(input);
    const auto& y = t.value(Var<Real>{&t, self});
    const auto& g = t.grad_buffer(self);
    auto& gx = t.grad_buffer(input.id);
    const Real slope = static_cast<Real>(act.slope);
    for (std::size_t i = 0; i < gx.numel(); ++i) {
      Real d;
      switch (act.kind) {
        case Activation::Kind::leaky_relu:
          d = x[i] > Real(0) ? Real(1) : slope;
          break;
        case Activation::Kind::tanh:
          d = Real(1) - y[i] * y[i];
          break;
        default:
          d = y[i] * (Real(1) - y[i]);
          break;
      }
      gx[i] += d * g[i];
    }
  });
}

template <typename Real>
Var<Real> concat_channels(Var<Real> a, Var<Real> b) {
  auto& tape = tape_of(a);
  auto out = concat_channels(a.value(), b.value());
  return tape.record(std::move(out), {a, b}, [=](Tape<Real>& t, std::uint32_t self) {
    const auto& g = t.grad_buffer(self);
    const auto& sa = t.value(a).shape();
    const auto& sb = t.value(b).shape();
    const auto plane = sa[2] * sa[3];
    const auto a_size = sa[1] * plane;
    const auto b_size = sb[1] * plane;
    for (std::int64_t n = 0; n < sa[0]; ++n) {
      const Real* src = g.data() + n * (a_size + b_size);
      if (t.requires_grad(a)) {
        Real* dst = t.grad_buffer(a.id).data() + n * a_size;
        for (std::int64_t i = 0; i < a_size; ++i) dst[i] += src[i];
      }
      if (t.requires_grad(b)) {
        Real* dst = t.grad_buffer(b.id).data() + n * b_size;
        for (std::int64_t i = 0; i < b_size; ++i) dst[i] += src[a_size + i];
      }
    }
  });
}

template <typename Real>
Var<Real> reduce_mean(Var<Real> input) {
  auto& tape = tape_of(input);
  BasicTensor<Real> out({1}, reduce_mean(input.value()));
  return tape.record(std::move(out), {input}, [=](Tape<Real>& t, std::uint32_t self) {
    auto& gx = t.grad_buffer(input.id);
    const Real share = t.grad_buffer(self)[0] / static_cast<Real>(gx.numel());
    for (auto& v : gx.values()) v += share;
  });
}

template <typename Real>
Var<Real> add(Var<Real> a, Var<Real> b) {
  require_same_shape("add", a, b);
  BasicTensor<Real> out = a.value();
  const auto& bv = b.value();
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] += bv[i];
  return tape_of(a).record(std::move(out), {a, b}, [=](Tape<Real>& t, std::uint32_t self) {
    const auto& g = t.grad_buffer(self);
    for (Var<Real> v : {a, b}) {
      if (!t.requires_grad(v)) continue;
      auto& gv = t.grad_buffer(v.id);
      for (std::size_t i = 0; i < gv.numel(); ++i) gv[i] += g[i];
    }
  });
}

template <typename Real>
Var<Real> sub(Var<Real> a, Var<Real> b) {
  require_same_shape("sub", a, b);
  BasicTensor<Real> out = a.value();
  const auto& bv = b.value();
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] -= bv[i];
  return tape_of(a).record(std::move(out), {a, b}, [=](Tape<Real>& t, std::uint32_t self) {
    const auto& g = t.grad_buffer(self);
    if (t.requires_grad(a)) {
      auto& ga = t.grad_buffer(a.id);
      for (std::size_t i = 0; i < ga.numel(); ++i) ga[i] += g[i];
    }
    if (t.requires_grad(b)) {
      auto& gb = t.grad_buffer(b.id);
      for (std::size_t i = 0; i < gb.numel(); ++i) gb[i] -= g[i];
    }
  });
}

template <typename Real>
Var<Real> mul(Var<Real> a, Var<Real> b) {
  require_same_shape("mul", a, b);
  BasicTensor<Real> out = a.value();
  const auto& bv = b.value();
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] *= bv[i];
  return tape_of(a).record(std::move(out), {a, b}, [=](Tape<Real>& t, std::uint32_t self) {
    const auto& g = t.grad_buffer(self);
    if (t.requires_grad(a)) {
      auto& ga = t.grad_buffer(a.id);
      const auto& bv = t.value(b);
      for (std::size_t i = 0; i < ga.numel(); ++i) ga[i] += g[i] * bv[i];
    }
    if (t.requires_grad(b)) {
      auto& gb = t.grad_buffer(b.id);
      const auto& av = t.value(a);
      for (std::size_t i = 0; i < gb.numel(); ++i) gb[i] += g[i] * av[i];
    }
  });
}

template <typename Real>
Var<Real> scale_by(Var<Real> scalar, Var<Real> x) {
  if (scalar.value().numel() != 1) {
    throw ShapeError("scale_by expects a single-element scale, got " + shape_string(scalar.shape()));
  }
  const Real s = scalar.value()[0];
  BasicTensor<Real> out = x.value();
  for (auto& v : out.values()) v *= s;
  return tape_of(x).record(std::move(out), {scalar, x}, [=](Tape<Real>& t, std::uint32_t self) {
    const auto& g = t.grad_buffer(self);
    const auto& xv = t.value(x);
    if (t.requires_grad(scalar)) {
      double sum = 0.0;
      for (std::size_t i = 0; i < g.numel(); ++i) sum += static_cast<double>(g[i]) * xv[i];
      t.grad_buffer(scalar.id)[0] += static_cast<Real>(sum);
    }
    if (t.requires_grad(x)) {
      auto& gx = t.grad_buffer(x.id);
      const Real sv = t.value(scalar)[0];
      for (std::size_t i = 0; i < gx.numel(); ++i) gx[i] += g[i] * sv;
    }
  });
}

template <typename Real>
Var<Real> affine(Var<Real> x, double a, double b) {
  const Real ra = static_cast<Real>(a);
  const Real rb = static_cast<Real>(b);
  BasicTensor<Real> out = x.value();
  for (auto& v : out.values()) v = ra * v + rb;
  return tape_of(x).record(std::move(out), {x}, [=](Tape<Real>& t, std::uint32_t self) {
    const auto& g = t.grad_buffer(self);
    auto& gx = t.grad_buffer(x.id);
    for (std::size_t i = 0; i < gx.numel(); ++i) gx[i] += ra * g[i];
  });
}

template <typename Real>
Var<Real> lerp(Var<Real> a, Var<Real> b, double weight) {
  require_same_shape("lerp", a, b);
  const Real wb = static_cast<Real>(weight);
  const Real wa = static_cast<Real>(1.0 - weight);
  BasicTensor<Real> out = a.value();
  const auto& bv = b.value();
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] = wa * out[i] + wb * bv[i];
  return tape_of(a).record(std::move(out), {a, b}, [=](Tape<Real>& t, std::uint32_t self) {
    const auto& g = t.grad_buffer(self);
    if (t.requires_grad(a)) {
      auto& ga = t.grad_buffer(a.id);
      for (std::size_t i = 0; i < ga.numel(); ++i) ga[i] += wa * g[i];
    }
    if (t.requires_grad(b)) {
      auto& gb = t.grad_buffer(b.id);
      for (std::size_t i = 0; i < gb.numel(); ++i) gb[i] += wb * g[i];
    }
  });
}

template <typename Real>
Var<Real> log_clamped(Var<Real> x, double eps) {
  const double lo = eps;
  const double hi = 1.0 - eps;
  BasicTensor<Real> out = x.value();
  for (auto& v : out.values()) v = static_cast<Real>(std::log(std::clamp(static_cast<double>(v), lo, hi)));
  return tape_of(x).record(std::move(out), {x}, [=](Tape<Real>& t, std::uint32_t self) {
    const auto& g = t.grad_buffer(self);
    const auto& xv = t.value(x);
    auto& gx = t.grad_buffer(x.id);
    for (std::size_t i = 0; i < gx.numel(); ++i) {
      const double v = xv[i];
      if (v >= lo && v <= hi) gx[i] += static_cast<Real>(g[i] / v);
    }
  });
}

template <typename Real>
Var<Real> abs(Var<Real> x) {
  BasicTensor<Real> out = x.value();
  for (auto& v : out.values()) v = std::abs(v);
  return tape_of(x).record(std::move(out), {x}, [=](Tape<Real>& t, std::uint32_t self) {
    const auto& g = t.grad_buffer(self);
    const auto& xv = t.value(x);
    auto& gx = t.grad_buffer(x.id);
    for (std::size_t i = 0; i < gx.numel(); ++i) {
      if (xv[i] > Real(0)) gx[i] += g[i];
      else if (xv[i] < Real(0)) gx[i] -= g[i];
    }
  });
}

template <typename Real>
Var<Real> reshape(Var<Real> x, Shape shape) {
  auto out = x.value().reshaped(std::move(shape));
  return tape_of(x).record(std::move(out), {x}, [=](Tape<Real>& t, std::uint32_t self) {
    const auto& g = t.grad_buffer(self);
    auto& gx = t.grad_buffer(x.id);
    for (std::size_t i = 0; i < gx.numel(); ++i) gx[i] += g[i];
  });
}

#define TERRAGAN_INSTANTIATE(Real)                                                        \
  template class Tape<Real>;                                                              \
  template Var<Real> conv2d<Real>(Var<Real>, Var<Real>, Var<Real>, ConvGeometry);         \
  template Var<Real> conv2d_transpose<Real>(Var<Real>, Var<Real>, Var<Real>, ConvGeometry); \
  template Var<Real> resample<Real>(Var<Real>, ResampleMode);                             \
  template Var<Real> activation<Real>(Var<Real>, Activation);                             \
  template Var<Real> concat_channels<Real>(Var<Real>, Var<Real>);                         \
  template Var<Real> reduce_mean<Real>(Var<Real>);                                        \
  template Var<Real> add<Real>(Var<Real>, Var<Real>);                                     \
  template Var<Real> sub<Real>(Var<Real>, Var<Real>);                                     \
  template Var<Real> mul<Real>(Var<Real>, Var<Real>);                                     \
  template Var<Real> scale_by<Real>(Var<Real>, Var<Real>);                                \
  template Var<Real> affine<Real>(Var<Real>, double, double);                             \
  template Var<Real> lerp<Real>(Var<Real>, Var<Real>, double);                            \
  template Var<Real> log_clamped<Real>(Var<Real>, double);                                \
  template Var<Real> abs<Real>(Var<Real>);                                                \
  template Var<Real> reshape<Real>(Var<Real>, Shape);

TERRAGAN_INSTANTIATE(float)
TERRAGAN_INSTANTIATE(double)
#undef TERRAGAN_INSTANTIATE

}  // namespace terragan
