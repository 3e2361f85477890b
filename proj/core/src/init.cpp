#include "botstack/init.hpp"

#include <cmath>

#include "botstack/error.hpp"

namespace botstack {

Tensor glorot_uniform(Rng& rng, Shape shape, std::size_t fan_in, std::size_t fan_out) {
  if (fan_in + fan_out == 0) throw ConfigError("glorot_uniform with zero fan");
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  Tensor t(std::move(shape));
  for (double& v : t.data()) v = rng.uniform(-limit, limit);
  return t;
}

Tensor orthogonal(Rng& rng, std::size_t n) {
  // Columns are orthonormalised in place with modified Gram-Schmidt; a
  // degenerate column (probability zero) is redrawn.
  Tensor q({n, n});
  for (double& v : q.data()) v = rng.normal();
  for (std::size_t j = 0; j < n; ++j) {
    for (int attempt = 0;; ++attempt) {
      for (std::size_t k = 0; k < j; ++k) {
        double dot = 0.0;
        for (std::size_t i = 0; i < n; ++i) dot += q[i * n + k] * q[i * n + j];
        for (std::size_t i = 0; i < n; ++i) q[i * n + j] -= dot * q[i * n + k];
      }
      double norm = 0.0;
      for (std::size_t i = 0; i < n; ++i) norm += q[i * n + j] * q[i * n + j];
      norm = std::sqrt(norm);
      if (norm > 1e-10) {
        for (std::size_t i = 0; i < n; ++i) q[i * n + j] /= norm;
        break;
      }
      if (attempt > 8) throw DomainError("orthogonal initialisation failed to converge");
      for (std::size_t i = 0; i < n; ++i) q[i * n + j] = rng.normal();
    }
  }
  return q;
}

Tensor orthogonal_blocks(Rng& rng, std::size_t hidden, std::size_t blocks) {
  Tensor out({hidden, hidden * blocks});
  const std::size_t width = hidden * blocks;
  for (std::size_t b = 0; b < blocks; ++b) {
    const Tensor q = orthogonal(rng, hidden);
    for (std::size_t i = 0; i < hidden; ++i)
      for (std::size_t j = 0; j < hidden; ++j) out[i * width + b * hidden + j] = q[i * hidden + j];
  }
  return out;
}

}  // namespace botstack
