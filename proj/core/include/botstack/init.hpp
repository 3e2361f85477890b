#pragma once

#include <cstddef>

#include "botstack/rng.hpp"
#include "botstack/tensor.hpp"

namespace botstack {

/// Uniform on [-l, l] with l = sqrt(6 / (fan_in + fan_out)).
Tensor glorot_uniform(Rng& rng, Shape shape, std::size_t fan_in, std::size_t fan_out);

/// Square matrix with orthonormal columns (Gram-Schmidt on a Gaussian draw).
Tensor orthogonal(Rng& rng, std::size_t n);

/// [h x blocks*h] made of independent orthogonal h x h blocks side by side.
Tensor orthogonal_blocks(Rng& rng, std::size_t hidden, std::size_t blocks);

}  // namespace botstack
