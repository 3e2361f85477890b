#include "botstack/grad_check.hpp"

#include <algorithm>
#include <cmath>

#include "botstack/error.hpp"

namespace botstack {
namespace {

double evaluate(const MultiScalarFn& f, const std::vector<Tensor>& inputs) {
  Tape tape;
  std::vector<Var> vars;
  vars.reserve(inputs.size());
  for (const Tensor& t : inputs) vars.push_back(tape.constant(t));
  const Tensor& out = tape.value(f(tape, vars));
  if (out.size() != 1) throw UsageError("grad_check: function output must be scalar, got " + to_string(out.shape()));
  return out[0];
}

}  // namespace

double grad_check(const ScalarFn& f, const Tensor& x, double eps) {
  return grad_check([&f](Tape& tape, std::span<const Var> vars) { return f(tape, vars[0]); },
                    std::vector<Tensor>{x}, eps);
}

double grad_check(const MultiScalarFn& f, const std::vector<Tensor>& inputs, double eps) {
  if (!(eps >= 1e-7 && eps <= 1e-4)) throw UsageError("grad_check: eps must lie in [1e-7, 1e-4]");

  Tape tape;
  std::vector<Var> vars;
  vars.reserve(inputs.size());
  for (const Tensor& t : inputs) vars.push_back(tape.parameter(t));
  const Var root = f(tape, vars);
  if (tape.value(root).size() != 1) {
    throw UsageError("grad_check: function output must be scalar, got " + to_string(tape.value(root).shape()));
  }
  const Gradients grads = tape.backward(root);

  double worst = 0.0;
  std::vector<Tensor> probe = inputs;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    const Tensor& analytic = grads[vars[k]];
    for (std::size_t i = 0; i < inputs[k].size(); ++i) {
      const double original = inputs[k][i];
      probe[k][i] = original + eps;
      const double up = evaluate(f, probe);
      probe[k][i] = original - eps;
      const double down = evaluate(f, probe);
      probe[k][i] = original;
      const double numeric = (up - down) / (2.0 * eps);
      const double denom = std::max({std::abs(analytic[i]), std::abs(numeric), 1e-8});
      worst = std::max(worst, std::abs(analytic[i] - numeric) / denom);
    }
  }
  return worst;
}

}  // namespace botstack
