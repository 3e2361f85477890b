#include "botstack/autodiff.hpp"

#include <atomic>

#include "botstack/error.hpp"

namespace botstack {
namespace {

std::uint64_t next_tape_id() {
  static std::atomic<std::uint64_t> counter{0};
  return ++counter;
}

}  // namespace

Tape::Tape() : id_(next_tape_id()) { nodes_.reserve(256); }

Var Tape::parameter(Tensor value) {
  nodes_.push_back(Node{std::move(value), {}, nullptr, true, true});
  return Var(id_, nodes_.size() - 1);
}

Var Tape::constant(Tensor value) {
  nodes_.push_back(Node{std::move(value), {}, nullptr, false, false});
  return Var(id_, nodes_.size() - 1);
}

Var Tape::record(Tensor value, std::vector<Var> inputs, BackwardFn backward) {
  Node node;
  node.value = std::move(value);
  node.inputs.reserve(inputs.size());
  for (const Var& in : inputs) {
    check_owned(in);
    node.inputs.push_back(in.id());
    node.requires_grad = node.requires_grad || nodes_[in.id()].requires_grad;
  }
  if (node.requires_grad) node.backward = std::move(backward);
  nodes_.push_back(std::move(node));
  return Var(id_, nodes_.size() - 1);
}

void Tape::check_owned(Var v) const {
  if (!v.valid() || v.tape_id() != id_ || v.id() >= nodes_.size()) {
    throw TapeError("value was not recorded on this tape");
  }
}

const Tensor& Tape::value(Var v) const {
  check_owned(v);
  return nodes_[v.id()].value;
}

bool Tape::requires_grad(Var v) const {
  check_owned(v);
  return nodes_[v.id()].requires_grad;
}

Gradients Tape::backward(Var root) const {
  check_owned(root);
  const Tensor& root_value = nodes_[root.id()].value;
  if (root_value.size() != 1) {
    throw UsageError("backward root must be scalar, got shape " + to_string(root_value.shape()));
  }

  Gradients out;
  out.tape_id_ = id_;
  out.grads_.resize(nodes_.size());
  out.grads_[root.id()] = Tensor(root_value.shape(), 1.0);

  std::vector<Tensor*> in_ptrs;
  for (std::size_t i = root.id() + 1; i-- > 0;) {
    const Node& node = nodes_[i];
    if (!node.backward || out.grads_[i].empty()) continue;
    in_ptrs.assign(node.inputs.size(), nullptr);
    for (std::size_t k = 0; k < node.inputs.size(); ++k) {
      const std::size_t in = node.inputs[k];
      if (!nodes_[in].requires_grad) continue;
      if (out.grads_[in].empty()) out.grads_[in] = Tensor(nodes_[in].value.shape(), 0.0);
      in_ptrs[k] = &out.grads_[in];
    }
    node.backward(*this, node.value, out.grads_[i], in_ptrs);
    // Interior gradients are dead once propagated.
    if (!node.parameter) out.grads_[i] = Tensor();
  }

  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].parameter && out.grads_[i].empty()) out.grads_[i] = Tensor(nodes_[i].value.shape(), 0.0);
  }
  return out;
}

const Tensor& Gradients::operator[](Var v) const {
  if (v.tape_id() != tape_id_ || v.id() >= grads_.size()) throw TapeError("gradient requested for foreign value");
  return grads_[v.id()];
}

bool Gradients::has(Var v) const {
  return v.tape_id() == tape_id_ && v.id() < grads_.size() && !grads_[v.id()].empty();
}

}  // namespace botstack
