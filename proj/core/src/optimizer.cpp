#include "botstack/optimizer.hpp"

#include <algorithm>
#include <cmath>

#include "botstack/error.hpp"

namespace botstack {

OptimizerKind parse_optimizer(std::string_view name) {
  if (name == "sgd") return OptimizerKind::sgd;
  if (name == "adagrad") return OptimizerKind::adagrad;
  if (name == "rmsprop") return OptimizerKind::rmsprop;
  if (name == "adam") return OptimizerKind::adam;
  if (name == "adamax") return OptimizerKind::adamax;
  throw ConfigError("unknown optimizer '" + std::string(name) + "'");
}

std::string_view optimizer_name(OptimizerKind kind) {
  switch (kind) {
    case OptimizerKind::sgd: return "sgd";
    case OptimizerKind::adagrad: return "adagrad";
    case OptimizerKind::rmsprop: return "rmsprop";
    case OptimizerKind::adam: return "adam";
    case OptimizerKind::adamax: return "adamax";
  }
  return "?";
}

double default_learning_rate(OptimizerKind kind) {
  return (kind == OptimizerKind::sgd || kind == OptimizerKind::adagrad) ? 0.01 : 0.001;
}

OptimizerConfig OptimizerConfig::defaults(OptimizerKind kind) {
  OptimizerConfig c;
  c.kind = kind;
  c.learning_rate = default_learning_rate(kind);
  return c;
}

Optimizer::Optimizer(OptimizerConfig config, std::span<const Parameter> params) : config_(std::move(config)) {
  if (!(config_.learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
  for (const Parameter& p : params) {
    shapes_.push_back(p.value.shape());
    if (config_.kind != OptimizerKind::sgd) first_.emplace_back(p.value.shape(), 0.0);
    if (config_.kind == OptimizerKind::adam || config_.kind == OptimizerKind::adamax) {
      second_.emplace_back(p.value.shape(), 0.0);
    }
  }
}

void Optimizer::step(std::span<Parameter> params, std::span<const Tensor> grads) {
  if (params.size() != shapes_.size()) {
    throw ConsistencyError("optimizer was built for " + std::to_string(shapes_.size()) + " parameters, got " +
                           std::to_string(params.size()));
  }
  double norm_sq = 0.0;
  for (std::size_t k = 0; k < params.size(); ++k) {
    if (k >= grads.size() || grads[k].empty()) throw ConsistencyError("missing gradient for parameter " + params[k].name);
    if (grads[k].shape() != shapes_[k] || params[k].value.shape() != shapes_[k]) {
      throw ConsistencyError("gradient for " + params[k].name + " has shape " + to_string(grads[k].shape()) +
                             ", parameter has " + to_string(params[k].value.shape()));
    }
    for (double g : grads[k].data()) {
      if (!std::isfinite(g)) throw NumericError("non-finite gradient for parameter " + params[k].name);
      norm_sq += g * g;
    }
  }
  if (grads.size() != params.size()) throw ConsistencyError("gradient count does not match parameter count");

  double scale = 1.0;
  if (config_.clip_norm) {
    const double norm = std::sqrt(norm_sq);
    if (norm > *config_.clip_norm) scale = *config_.clip_norm / norm;
  }

  ++steps_;
  const double lr = config_.learning_rate;
  const double eps = config_.epsilon;
  const double b1 = config_.beta1, b2 = config_.beta2, rho = config_.rho;
  const double t = static_cast<double>(steps_);
  const double bias1 = 1.0 - std::pow(b1, t);
  const double bias2 = 1.0 - std::pow(b2, t);

  for (std::size_t k = 0; k < params.size(); ++k) {
    double* theta = params[k].value.data().data();
    const double* grad = grads[k].data().data();
    const std::size_t n = params[k].value.size();
    switch (config_.kind) {
      case OptimizerKind::sgd:
        for (std::size_t i = 0; i < n; ++i) theta[i] -= lr * (scale * grad[i]);
        break;
      case OptimizerKind::adagrad: {
        double* acc = first_[k].data().data();
        for (std::size_t i = 0; i < n; ++i) {
          const double g = scale * grad[i];
          acc[i] += g * g;
          theta[i] -= lr * g / (std::sqrt(acc[i]) + eps);
        }
        break;
      }
      case OptimizerKind::rmsprop: {
        double* avg = first_[k].data().data();
        for (std::size_t i = 0; i < n; ++i) {
          const double g = scale * grad[i];
          avg[i] = rho * avg[i] + (1.0 - rho) * g * g;
          theta[i] -= lr * g / (std::sqrt(avg[i]) + eps);
        }
        break;
      }
      case OptimizerKind::adam: {
        double* m = first_[k].data().data();
        double* v = second_[k].data().data();
        for (std::size_t i = 0; i < n; ++i) {
          const double g = scale * grad[i];
          m[i] = b1 * m[i] + (1.0 - b1) * g;
          v[i] = b2 * v[i] + (1.0 - b2) * g * g;
          const double m_hat = m[i] / bias1;
          const double v_hat = v[i] / bias2;
          theta[i] -= lr * m_hat / (std::sqrt(v_hat) + eps);
        }
        break;
      }
      case OptimizerKind::adamax: {
        double* m = first_[k].data().data();
        double* u = second_[k].data().data();
        for (std::size_t i = 0; i < n; ++i) {
          const double g = scale * grad[i];
          m[i] = b1 * m[i] + (1.0 - b1) * g;
          u[i] = std::max(b2 * u[i], std::abs(g));
          theta[i] -= (lr / bias1) * m[i] / (u[i] + eps);
        }
        break;
      }
    }
  }
}

}  // namespace botstack
