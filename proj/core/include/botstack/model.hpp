#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "botstack/autodiff.hpp"
#include "botstack/model_config.hpp"
#include "botstack/optimizer.hpp"

namespace botstack {

struct LayerSummary {
  std::string name;
  std::string kind;
  Shape output;  // per sample
  std::vector<Shape> params;
  std::size_t param_count = 0;
  std::string activation;
};

/// A built base model (any kind except stacked): its configuration, its
/// layer plan and its parameter tensors.
///
/// Inputs are [batch x input_width] rows of encoded features. Sequence
/// models read a row of F features as F steps of one channel.
///
///   ann     dense hidden layers, head
///   cnn     (conv k, same padding, act -> maxpool) per conv block, hidden dense layers, head
///   rnn/lstm/gru/bilstm/bigru
///           stacked recurrent layers (all but the last pass every step on),
///           the last layer's final state (both directions for bi*), head
class Model {
 public:
  /// Builds and initialises from config.seed: Glorot-uniform input and
  /// kernel weights, orthogonal recurrent weights, zero biases.
  Model(ModelConfig config, std::size_t input_width);
  /// Rebuilds the architecture and adopts the given parameter values, which
  /// must match the layer plan in count and shape (IntegrityError otherwise).
  Model(ModelConfig config, std::size_t input_width, std::vector<Tensor> values);

  const ModelConfig& config() const noexcept { return config_; }
  std::size_t input_width() const noexcept { return input_width_; }
  std::size_t output_width() const noexcept { return config_.head_width(); }

  std::vector<Parameter>& parameters() noexcept { return params_; }
  const std::vector<Parameter>& parameters() const noexcept { return params_; }
  std::size_t parameter_count() const;
  /// FNV-1a over parameter names and values.
  std::uint64_t checksum() const;

  const std::vector<LayerSummary>& summary() const noexcept { return summary_; }
  nlohmann::json summary_json() const;

  /// Head probabilities for x on `tape`; `params` are tape handles for
  /// parameters() in order.
  Var forward(Tape& tape, Var x, std::span<const Var> params) const;
  /// Probabilities without recording gradients: [N x 1] or [N x C].
  Tensor predict_proba(const Tensor& x) const;

 private:
  enum class BlockType { dense, conv, pool, recurrent, bidirectional };
  struct Block {
    BlockType type = BlockType::dense;
    std::size_t first_param = 0;
    std::optional<Activation> act;
    std::size_t steps = 0, channels = 0;  // input sequence geometry
    std::size_t kernel = 0, padding = 0;  // conv / pool size
    CellKind cell = CellKind::rnn;
    bool final_state = true;
  };

  void plan();
  void add_params(const std::string& prefix, const std::vector<std::string>& names, const std::vector<Shape>& shapes);

  ModelConfig config_;
  std::size_t input_width_ = 0;
  std::vector<Block> blocks_;
  std::vector<Parameter> params_;
  std::vector<LayerSummary> summary_;
};

/// Argmax per row for softmax outputs, p >= 0.5 for a single column.
std::vector<int> predict_classes(const Tensor& probabilities);
double accuracy_of(const Tensor& probabilities, std::span<const int> classes);

}  // namespace botstack
