#include "botstack/presets.hpp"

#include "botstack/error.hpp"
#include "botstack/rng.hpp"

namespace botstack {
namespace {

struct Row {
  const char* name;
  ModelKind kind;
  std::size_t layers;
  std::vector<std::size_t> hidden;  // unit stack without the head
  std::vector<Activation> acts;
  OptimizerKind opt;
  std::size_t epochs;
};

using A = Activation;
using O = OptimizerKind;
using K = ModelKind;

const std::vector<Row>& rows() {
  static const std::vector<Row> table = {
      {"ann-adagrad-20", K::ann, 3, {64, 32}, {A::relu, A::tanh}, O::adagrad, 20},
      {"ann-sgd-20", K::ann, 3, {64, 32}, {A::softmax, A::sigmoid}, O::sgd, 20},
      {"ann-adam-20", K::ann, 3, {64, 32}, {A::softmax, A::relu}, O::adam, 20},
      {"cnn-adagrad-30", K::cnn, 6, {64, 32}, {A::tanh, A::relu}, O::adagrad, 30},
      {"cnn-rmsprop-30", K::cnn, 6, {64, 32}, {A::softmax, A::relu}, O::rmsprop, 30},
      {"cnn-adam-30", K::cnn, 6, {64, 32}, {A::tanh, A::relu}, O::adam, 30},
      {"lstm-adamax-sigmoid-30", K::lstm, 2, {64}, {A::sigmoid}, O::adamax, 30},
      {"lstm-adamax-relu-30", K::lstm, 2, {64}, {A::relu}, O::adamax, 30},
      {"lstm-rmsprop-30", K::lstm, 2, {64}, {A::tanh}, O::rmsprop, 30},
      {"rnn-sgd-25", K::rnn, 2, {64}, {A::softmax}, O::sgd, 25},
      {"rnn-rmsprop-25", K::rnn, 2, {64}, {A::tanh}, O::rmsprop, 25},
      {"rnn-adam-25", K::rnn, 2, {64}, {A::sigmoid}, O::adam, 25},
      {"proposed-adagrad-25", K::stacked, 18, {64, 32}, {A::relu, A::sigmoid}, O::adagrad, 25},
      {"proposed-adamax-25", K::stacked, 18, {64, 32}, {A::tanh, A::sigmoid}, O::adamax, 25},
      {"proposed-adam-25", K::stacked, 18, {64, 32}, {A::relu, A::tanh}, O::adam, 25},
  };
  return table;
}

std::vector<std::size_t> with_head(std::vector<std::size_t> hidden, LabelMode mode, std::size_t classes) {
  hidden.push_back(mode == LabelMode::binary ? 1 : classes);
  return hidden;
}

ModelConfig base(std::string name, K kind, std::size_t layers, std::vector<std::size_t> hidden,
                 std::vector<Activation> acts, OptimizerKind opt, std::size_t epochs, LabelMode mode,
                 std::uint64_t seed, std::size_t classes) {
  ModelConfig c;
  c.name = std::move(name);
  c.kind = kind;
  c.layers = layers;
  c.units = with_head(std::move(hidden), mode, classes);
  c.activations = std::move(acts);
  c.optimizer = OptimizerConfig::defaults(opt);
  c.epochs = epochs;
  c.head = mode == LabelMode::binary ? Head::sigmoid : Head::softmax;
  c.seed = seed;
  return c;
}

}  // namespace

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const Row& r : rows()) out.emplace_back(r.name);
    return out;
  }();
  return names;
}

ModelConfig make_stacked(std::string name, std::vector<Activation> activations, OptimizerKind optimizer,
                         std::size_t epochs, LabelMode mode, std::uint64_t seed, std::size_t classes,
                         StackVariant variant) {
  ModelConfig c = base(name, K::stacked, 18, {64, 32}, activations, optimizer, epochs, mode, seed, classes);
  auto member = [&](const char* suffix, K kind, std::size_t layers, std::vector<std::size_t> hidden,
                    std::vector<Activation> acts) {
    const std::uint64_t s = derive_seed(seed, {c.bases.size() + 1});
    c.bases.push_back(base(name + "/" + suffix, kind, layers, std::move(hidden), std::move(acts), optimizer, epochs,
                           mode, s, classes));
  };
  if (variant == StackVariant::ann_cnn_bilstm_rnn) member("ann", K::ann, 3, {64, 32}, activations);
  member("cnn", K::cnn, 6, {64, 32}, activations);
  member("bilstm", K::bilstm, 2, {64}, {A::tanh});
  if (variant == StackVariant::cnn_bilstm_bigru_rnn) member("bigru", K::bigru, 2, {64}, {A::tanh});
  member("rnn", K::rnn, 2, {64}, {A::tanh});
  return c;
}

ModelConfig preset(std::string_view name, LabelMode mode, std::uint64_t seed, std::size_t classes) {
  for (const Row& r : rows()) {
    if (r.name != name) continue;
    if (r.kind == K::stacked) return make_stacked(r.name, r.acts, r.opt, r.epochs, mode, seed, classes);
    return base(r.name, r.kind, r.layers, r.hidden, r.acts, r.opt, r.epochs, mode, seed, classes);
  }
  std::string valid;
  for (const std::string& n : preset_names()) valid += (valid.empty() ? "" : ", ") + n;
  throw ConfigError("unknown preset '" + std::string(name) + "'; valid presets: " + valid);
}

}  // namespace botstack
