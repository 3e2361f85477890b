#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "botstack/layers.hpp"
#include "botstack/optimizer.hpp"

namespace botstack {

enum class ModelKind { ann, cnn, lstm, gru, rnn, bilstm, bigru, stacked };

ModelKind parse_model_kind(std::string_view name);
std::string_view model_kind_name(ModelKind kind);
bool is_recurrent(ModelKind kind);

/// sigmoid: one P(attack) column. softmax: one probability per class.
enum class Head { sigmoid, softmax };

Head parse_head(std::string_view name);
std::string_view head_name(Head head);

/// Declarative description of one model.
///
/// `units` ends with the head width: 1 for a sigmoid head, the class count
/// (at least 2) for a softmax head. The declared layer count must agree with
/// the architecture:
///   ann                 layers == |units|            (dense stack)
///   rnn/lstm/gru/bi*    layers == |units|            (|units|-1 recurrent layers + head)
///   cnn                 layers == 2|conv| + |units| - 1
///                       (conv+pool pairs, hidden dense layers; the head is not counted)
///   stacked             free; the meta-learner is a dense stack over `units`
///
/// Activations hold one or two names. The first drives the hidden layers
/// (conv layers for cnn, the cell for recurrent kinds). A second
/// non-probabilistic name (relu or tanh) drives the last hidden dense layer,
/// and for cnn all of its dense layers. The head is always sigmoid or softmax.
struct ModelConfig {
  std::string name;
  ModelKind kind = ModelKind::ann;
  std::size_t layers = 3;
  std::vector<std::size_t> units{64, 32, 1};
  std::vector<Activation> activations{Activation::relu};
  OptimizerConfig optimizer;
  std::size_t epochs = 20;
  std::size_t batch_size = 128;
  Head head = Head::sigmoid;
  std::uint64_t seed = 42;

  // cnn
  std::vector<std::size_t> conv_channels{32, 64};
  std::size_t kernel = 3;
  std::size_t pool = 2;

  // stacked
  std::vector<ModelConfig> bases;
  std::size_t folds = 5;

  std::size_t head_width() const { return units.empty() ? 0 : units.back(); }

  /// ConfigError describing the first violated rule.
  void validate() const;

  nlohmann::json to_json() const;
  static ModelConfig from_json(const nlohmann::json& j);
};

bool operator==(const ModelConfig& a, const ModelConfig& b);

}  // namespace botstack
