#pragma once

#include <functional>
#include <span>
#include <vector>

#include "botstack/autodiff.hpp"
#include "botstack/tensor.hpp"

namespace botstack {

using ScalarFn = std::function<Var(Tape&, Var)>;
using MultiScalarFn = std::function<Var(Tape&, std::span<const Var>)>;

/// Compares reverse-mode gradients of a scalar function against central
/// differences (f(x + eps) - f(x - eps)) / (2 eps). Returns the maximum over
/// coordinates of |analytic - numeric| / max(|analytic|, |numeric|, 1e-8).
/// eps must lie in [1e-7, 1e-4]; a non-scalar output is a UsageError.
double grad_check(const ScalarFn& f, const Tensor& x, double eps = 1e-5);

/// Same check over several inputs at once; every input is a parameter leaf.
double grad_check(const MultiScalarFn& f, const std::vector<Tensor>& inputs, double eps = 1e-5);

}  // namespace botstack
