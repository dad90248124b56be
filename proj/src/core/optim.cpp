#include "terragan/core/optim.hpp"

#include <cmath>

#include "terragan/core/errors.hpp"

namespace terragan {

template <typename Real>
void optimizer_step(std::span<Parameter<Real>* const> params, const OptimizerRule& rule) {
  for (Parameter<Real>* p : params) {
    if (!p->grad_ready) throw ContractError("optimizer step on a parameter without a gradient");
  }
  for (Parameter<Real>* p : params) {
    auto& w = p->value;
    const auto& g = p->grad;
    if (const auto* sgd = std::get_if<Sgd>(&rule)) {
      const Real lr = static_cast<Real>(sgd->lr);
      for (std::size_t i = 0; i < w.numel(); ++i) w[i] -= lr * g[i];
    } else {
      const auto& adam = std::get<Adam>(rule);
      p->steps += 1;
      const double t = static_cast<double>(p->steps);
      const double correction1 = 1.0 - std::pow(adam.beta1, t);
      const double correction2 = 1.0 - std::pow(adam.beta2, t);
      auto& m = p->first_moment;
      auto& v = p->second_moment;
      const Real b1 = static_cast<Real>(adam.beta1);
      const Real b2 = static_cast<Real>(adam.beta2);
      for (std::size_t i = 0; i < w.numel(); ++i) {
        m[i] = b1 * m[i] + (Real(1) - b1) * g[i];
        v[i] = b2 * v[i] + (Real(1) - b2) * g[i] * g[i];
        const double m_hat = m[i] / correction1;
        const double v_hat = v[i] / correction2;
        w[i] -= static_cast<Real>(adam.lr * m_hat / (std::sqrt(v_hat) + adam.eps));
      }
    }
    p->zero_grad();
  }
}

template <typename Real>
void zero_grads(std::span<Parameter<Real>* const> params) {
  for (Parameter<Real>* p : params) p->zero_grad();
}

template void optimizer_step<float>(std::span<Parameter<float>* const>, const OptimizerRule&);
template void optimizer_step<double>(std::span<Parameter<double>* const>, const OptimizerRule&);
template void zero_grads<float>(std::span<Parameter<float>* const>);
template void zero_grads<double>(std::span<Parameter<double>* const>);

}  // namespace terragan
