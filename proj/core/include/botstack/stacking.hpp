#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <nlohmann/json.hpp>

#include "botstack/model.hpp"
#include "botstack/pipeline.hpp"
#include "botstack/train.hpp"

namespace botstack {

/// Fold of every training row. Rows sharing an origin (oversampled copies)
/// always land in the same fold, and each class's origins are dealt
/// round-robin over the folds after a seeded shuffle.
struct FoldPlan {
  std::size_t folds = 0;
  std::vector<std::size_t> fold_of_row;

  std::vector<std::size_t> rows_in(std::size_t fold) const;
  std::vector<std::size_t> rows_outside(std::size_t fold) const;
};

/// FoldError when `folds` exceeds the number of distinct origins of the
/// smallest class present.
FoldPlan assign_folds(const EncodedMatrix& data, std::size_t folds, std::uint64_t seed);

/// Base models plus a dense meta-learner over their concatenated
/// probabilities (base order is significant).
class StackedModel {
 public:
  StackedModel(ModelConfig config, std::vector<Model> bases, Model meta);

  const ModelConfig& config() const noexcept { return config_; }
  const std::vector<Model>& bases() const noexcept { return bases_; }
  const Model& meta() const noexcept { return meta_; }
  std::size_t input_width() const noexcept { return bases_.front().input_width(); }
  std::size_t output_width() const noexcept { return meta_.output_width(); }

  /// [N x sum of base output widths]
  Tensor meta_features(const Tensor& x) const;
  Tensor predict_proba(const Tensor& x) const;
  std::uint64_t checksum() const;
  std::size_t parameter_count() const;
  nlohmann::json summary_json() const;

 private:
  ModelConfig config_;
  std::vector<Model> bases_;
  Model meta_;
};

/// Dense meta-learner configuration implied by a stacked config.
ModelConfig meta_config(const ModelConfig& stacked);

/// Which rows trained the model that produced each out-of-fold prediction.
struct StackingRecord {
  FoldPlan plan;
  std::vector<std::vector<std::vector<std::size_t>>> trained_rows;  // [base][fold]
  Tensor meta_features;  // out-of-fold probabilities, [N x sum of base widths]
};

struct StackedTrainResult {
  StackedModel model;
  TrainReport report;
  StackingRecord record;
};

/// K-fold out-of-fold stacking: each base trains on K-1 folds and predicts
/// the held-out fold; the meta-learner trains on those predictions; each base
/// is then retrained on every row for inference.
StackedTrainResult train_stacked(const ModelConfig& config, const EncodedMatrix& data, const TrainOptions& options = {});

/// True when no out-of-fold prediction for row i came from a model that
/// trained on a row with the origin of i.
bool out_of_fold_ok(const StackingRecord& record, const EncodedMatrix& data);

}  // namespace botstack
