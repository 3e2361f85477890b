#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "botstack/model.hpp"
#include "botstack/pipeline.hpp"

namespace botstack {

struct EpochStats {
  std::size_t epoch = 0;  // 1-based
  double loss = 0.0;      // mean batch loss
  double accuracy = 0.0;  // full training set, end-of-epoch parameters; NaN when not evaluated
  double running_accuracy = 0.0;  // batch predictions made before each update
  double seconds = 0.0;   // cumulative wall-clock time
};

struct TrainReport {
  std::string model;
  ModelConfig config;
  std::uint64_t seed = 0;
  std::vector<EpochStats> epochs;
  double seconds = 0.0;
  double final_train_accuracy = 0.0;
  std::uint64_t checksum = 0;
  std::size_t train_rows = 0;
  std::vector<TrainReport> bases;  // stacked models only

  nlohmann::json to_json() const;
};

struct TrainOptions {
  /// Evaluate the full training set after every epoch. When off, only the
  /// last epoch is evaluated.
  bool evaluate_each_epoch = false;
  std::function<void(const EpochStats&)> on_epoch;
};

/// Mini-batch training with the configured optimizer. Rows are reshuffled
/// every epoch from a stream derived from config.seed. Binary heads use
/// binary cross-entropy, softmax heads categorical cross-entropy.
///
/// UsageError when the data label mode does not fit the head; NumericError
/// (with epoch and batch) when a loss, gradient or updated parameter turns
/// non-finite.
TrainReport train(Model& model, const EncodedMatrix& data, const TrainOptions& options = {});

/// Checks that `data` can feed `config`: UsageError for a width or label-mode
/// mismatch, ConfigError when a softmax head width differs from the class count.
void check_compatible(const ModelConfig& config, std::size_t input_width, const EncodedMatrix& data);

}  // namespace botstack
