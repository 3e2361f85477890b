#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "botstack/model_config.hpp"
#include "botstack/pipeline.hpp"

namespace botstack {

/// Names of the fifteen hyperparameter rows, e.g. "ann-adagrad-20",
/// "lstm-adamax-relu-30", "proposed-adagrad-25".
const std::vector<std::string>& preset_names();

/// The named row as a config. Binary mode ends the unit stack in a sigmoid
/// unit; multiclass mode swaps that unit for a softmax over the schema
/// classes. Learning rates are the optimizer defaults. ConfigError listing
/// the valid names when `name` is unknown.
ModelConfig preset(std::string_view name, LabelMode mode, std::uint64_t seed, std::size_t classes = 10);

enum class StackVariant {
  ann_cnn_bilstm_rnn,   // default membership
  cnn_bilstm_bigru_rnn  // alternative membership
};

/// Stacked config with the given meta-learner settings. Every base shares
/// the optimizer and epoch count; ann and cnn bases take the activations,
/// recurrent bases use tanh cells.
ModelConfig make_stacked(std::string name, std::vector<Activation> activations, OptimizerKind optimizer,
                         std::size_t epochs, LabelMode mode, std::uint64_t seed, std::size_t classes = 10,
                         StackVariant variant = StackVariant::ann_cnn_bilstm_rnn);

}  // namespace botstack
