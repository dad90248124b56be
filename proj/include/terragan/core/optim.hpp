#pragma once

#include <span>
#include <variant>

#include "terragan/core/autograd.hpp"

namespace terragan {

struct Sgd {
  double lr = 0.01;
};

struct Adam {
  double lr = 2e-4;
  double beta1 = 0.5;
  double beta2 = 0.999;
  double eps = 1e-8;
};

using OptimizerRule = std::variant<Sgd, Adam>;

/// Applies one update to every parameter and zeroes its gradient.
/// Throws ContractError if a parameter has no populated gradient.
template <typename Real>
void optimizer_step(std::span<Parameter<Real>* const> params, const OptimizerRule& rule);

template <typename Real>
void zero_grads(std::span<Parameter<Real>* const> params);

}  // namespace terragan
