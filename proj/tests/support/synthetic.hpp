#pragma once

// Small labelled datasets with known structure, built without the library's
// own RNG.

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "botstack/pipeline.hpp"

namespace synthetic {

using botstack::EncodedMatrix;
using botstack::LabelMode;
using botstack::Tensor;

inline EncodedMatrix from_rows(Tensor x, std::vector<int> classes, LabelMode mode, std::size_t class_count) {
  EncodedMatrix m;
  m.mode = mode;
  m.class_count = mode == LabelMode::binary ? 2 : class_count;
  m.targets = botstack::make_targets(classes, mode, m.class_count);
  m.classes = std::move(classes);
  for (std::size_t j = 0; j < x.cols(); ++j) m.feature_names.push_back("f" + std::to_string(j));
  m.origin.resize(m.classes.size());
  for (std::size_t i = 0; i < m.origin.size(); ++i) m.origin[i] = i;
  m.x = std::move(x);
  return m;
}

// Isotropic unit-variance Gaussian blobs. Class c has its mean at
// `separation` along axis c mod features (sign flipping every `features`
// classes), so neighbouring means are separation * sqrt(2) apart.
inline EncodedMatrix blobs(std::size_t n, std::size_t classes, std::size_t features, double separation,
                           std::uint64_t seed, LabelMode mode) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  Tensor x({n, features});
  std::vector<int> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t c = i % classes;
    y[i] = static_cast<int>(c);
    for (std::size_t j = 0; j < features; ++j) x.set(i, j, noise(rng));
    const double sign = (c / features) % 2 == 0 ? 1.0 : -1.0;
    x.set(i, c % features, x.at(i, c % features) + sign * separation);
  }
  return from_rows(std::move(x), std::move(y), mode, classes);
}

// Two unit-variance Gaussian blobs whose means differ by `separation`
// standard deviations along every axis.
inline EncodedMatrix two_blobs(std::size_t n, std::size_t features, double separation, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  const double offset = separation / 2.0;
  Tensor x({n, features});
  std::vector<int> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = static_cast<int>(i % 2);
    for (std::size_t j = 0; j < features; ++j) x.set(i, j, noise(rng) + (y[i] == 1 ? offset : -offset));
  }
  return from_rows(std::move(x), std::move(y), LabelMode::binary, 2);
}

inline EncodedMatrix xor_data() {
  Tensor x = Tensor::matrix({{0.0, 0.0}, {0.0, 1.0}, {1.0, 0.0}, {1.0, 1.0}});
  return from_rows(std::move(x), {0, 1, 1, 0}, LabelMode::binary, 2);
}

}  // namespace synthetic
