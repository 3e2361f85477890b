#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "botstack/tensor.hpp"

namespace botstack {

/// A named trainable tensor owned by a model.
struct Parameter {
  std::string name;
  Tensor value;
};

enum class OptimizerKind { sgd, adagrad, rmsprop, adam, adamax };

OptimizerKind parse_optimizer(std::string_view name);
std::string_view optimizer_name(OptimizerKind kind);
/// sgd and adagrad: 0.01; rmsprop, adam and adamax: 0.001.
double default_learning_rate(OptimizerKind kind);

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::adagrad;
  double learning_rate = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double rho = 0.9;
  double epsilon = 1e-8;
  /// Global L2 gradient-norm clipping; off unless set.
  std::optional<double> clip_norm;

  static OptimizerConfig defaults(OptimizerKind kind);
};

/// Per-parameter update rules, with g the gradient, t the 1-based step count
/// and eps added after the square root:
///
///   sgd      theta -= lr * g
///   adagrad  a += g^2;                       theta -= lr * g / (sqrt(a) + eps)
///   rmsprop  v = rho v + (1 - rho) g^2;      theta -= lr * g / (sqrt(v) + eps)
///   adam     m = b1 m + (1 - b1) g;  v = b2 v + (1 - b2) g^2
///            theta -= lr * (m / (1 - b1^t)) / (sqrt(v / (1 - b2^t)) + eps)
///   adamax   m = b1 m + (1 - b1) g;  u = max(b2 u, |g|)
///            theta -= lr / (1 - b1^t) * m / (u + eps)
///
/// Slot tensors have the shape of their parameter. step() validates every
/// gradient before touching any parameter, so a failed step changes nothing.
class Optimizer {
 public:
  Optimizer(OptimizerConfig config, std::span<const Parameter> params);

  void step(std::span<Parameter> params, std::span<const Tensor> grads);

  const OptimizerConfig& config() const noexcept { return config_; }
  std::uint64_t step_count() const noexcept { return steps_; }
  /// adagrad accumulator / rmsprop average / adam first moment / adamax first moment.
  const std::vector<Tensor>& first_slots() const noexcept { return first_; }
  /// adam second moment / adamax infinity norm.
  const std::vector<Tensor>& second_slots() const noexcept { return second_; }

 private:
  OptimizerConfig config_;
  std::vector<Shape> shapes_;
  std::vector<Tensor> first_;
  std::vector<Tensor> second_;
  std::uint64_t steps_ = 0;
};

}  // namespace botstack
