#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "botstack/tensor.hpp"

namespace botstack {

class Tape;

/// Handle to a value recorded on a Tape. Cheap to copy; only meaningful
/// together with the tape that produced it.
class Var {
 public:
  Var() = default;
  std::size_t id() const noexcept { return id_; }
  std::uint64_t tape_id() const noexcept { return tape_id_; }
  bool valid() const noexcept { return tape_id_ != 0; }

 private:
  friend class Tape;
  Var(std::uint64_t tape_id, std::size_t id) : tape_id_(tape_id), id_(id) {}
  std::uint64_t tape_id_ = 0;
  std::size_t id_ = 0;
};

class Gradients;

/// Local gradient rule of one recorded operation. `out` is the node's value
/// and `out_grad` is dL/d(out); the rule adds dL/d(input k) into
/// *in_grads[k]. Entries are null for inputs that do not require a gradient.
using BackwardFn = std::function<void(const Tape& tape, const Tensor& out, const Tensor& out_grad,
                                      std::span<Tensor* const> in_grads)>;

/// Append-only record of primitive operations for reverse-mode
/// differentiation. Every node's inputs precede it, so a single reverse sweep
/// visits nodes in a valid order. A tape is single-threaded and pinned in
/// memory (no copy, no move) because recorded rules refer back to it.
class Tape {
 public:
  Tape();
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Trainable leaf: always receives a gradient from backward().
  Var parameter(Tensor value);
  /// Non-trainable leaf (data, targets, fixed states).
  Var constant(Tensor value);
  Var record(Tensor value, std::vector<Var> inputs, BackwardFn backward);

  const Tensor& value(Var v) const;
  bool requires_grad(Var v) const;
  std::size_t size() const noexcept { return nodes_.size(); }
  std::uint64_t id() const noexcept { return id_; }

  /// Reverse sweep from a scalar root. Leaves not reachable from the root get
  /// zero gradients. Gradients arriving from several paths are summed.
  Gradients backward(Var root) const;

  void check_owned(Var v) const;

 private:
  struct Node {
    Tensor value;
    std::vector<std::size_t> inputs;
    BackwardFn backward;
    bool requires_grad = false;
    bool parameter = false;
  };
  std::uint64_t id_;
  std::vector<Node> nodes_;
};

class Gradients {
 public:
  /// Gradient for a parameter leaf (or any node that received one).
  const Tensor& operator[](Var v) const;
  bool has(Var v) const;

 private:
  friend class Tape;
  std::uint64_t tape_id_ = 0;
  std::vector<Tensor> grads_;
};

}  // namespace botstack
