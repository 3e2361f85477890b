#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "botstack/dataset.hpp"
#include "botstack/tensor.hpp"

namespace botstack {

/// binary: targets are the `label` column (0 normal, 1 attack).
/// multiclass: targets are the attack category, one-hot over the schema classes.
enum class LabelMode { binary, multiclass };

LabelMode parse_label_mode(std::string_view name);
std::string_view label_mode_name(LabelMode mode);

/// One-hot encoder for the categorical feature columns. Categories are kept
/// in first-appearance order over the fit rows; a value never seen during
/// fitting encodes as all zeros.
class CategoricalEncoder {
 public:
  void fit(const RawDataset& ds, std::span<const std::size_t> rows);

  /// Total one-hot width over all categorical columns.
  std::size_t width() const noexcept;
  const std::vector<std::vector<std::string>>& categories() const noexcept { return categories_; }
  const std::vector<std::string>& column_names() const noexcept { return columns_; }

  /// Writes the one-hot block of categorical column `column` for `value` into out[0, block width).
  void encode(std::size_t column, const std::string& value, std::span<double> out) const;
  /// Category named by a one-hot block of `column`; empty for the all-zero block.
  std::optional<std::string> decode(std::size_t column, std::span<const double> block) const;

  nlohmann::json to_json() const;
  static CategoricalEncoder from_json(const nlohmann::json& j);

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<std::string>> categories_;
};

/// Per-column z-score (x - mean) / (stddev + 1e-8) with the population
/// standard deviation of the fit rows.
class Normalizer {
 public:
  static constexpr double kEpsilon = 1e-8;

  void fit(const Tensor& x, std::span<const std::size_t> rows);
  void apply(Tensor& x) const;

  const std::vector<double>& mean() const noexcept { return mean_; }
  const std::vector<double>& stddev() const noexcept { return stddev_; }

  nlohmann::json to_json() const;
  static Normalizer from_json(const nlohmann::json& j);

 private:
  std::vector<double> mean_;
  std::vector<double> stddev_;
};

/// Encoded features with their targets.
///
/// `targets` is [N x 1] of {0, 1} in binary mode and [N x C] one-hot in
/// multiclass mode. `classes` holds the integer target of each row and
/// `origin` the index of the raw record the row was built from (duplicates
/// made by balancing share the origin of their source).
struct EncodedMatrix {
  Tensor x;
  Tensor targets;
  std::vector<int> classes;
  std::vector<std::size_t> origin;
  std::vector<std::string> feature_names;
  LabelMode mode = LabelMode::binary;
  std::size_t class_count = 2;

  std::size_t rows() const noexcept { return classes.size(); }
  std::size_t features() const noexcept { return feature_names.size(); }
  std::vector<std::size_t> counts() const;
  /// The given rows, in the given order.
  EncodedMatrix select(std::span<const std::size_t> rows) const;
};

/// Builds the target tensor for integer classes.
Tensor make_targets(std::span<const int> classes, LabelMode mode, std::size_t class_count);

/// Integer targets of every record under `mode`.
std::vector<int> record_classes(const RawDataset& ds, LabelMode mode);
/// Class names under `mode` (binary: "0" and "1").
std::vector<std::string> class_names(const Schema& schema, LabelMode mode);

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Random train/test partition of [0, classes.size()). Stratified: every
/// class contributes round(n_c * fraction) test rows. Otherwise the test set
/// has round(N * fraction) rows. Both index lists come back sorted.
/// A fraction outside (0, 1) is a UsageError.
SplitIndices split(std::span<const int> classes, double test_fraction, std::uint64_t seed, bool stratified);

/// Oversampling plan: all rows in order, then for each minority class
/// (ascending index) enough draws with replacement from that class to reach
/// the majority count. An already balanced input yields the identity plan.
/// A class with no rows is a ValidationError naming it.
std::vector<std::size_t> balance_plan(std::span<const int> classes, std::span<const std::string> names,
                                      std::uint64_t seed);

EncodedMatrix balance(const EncodedMatrix& m, std::span<const std::string> names, std::uint64_t seed);

struct PipelineConfig {
  LabelMode mode = LabelMode::binary;
  double test_fraction = 0.3;
  bool stratified = true;
  bool balance = true;
  std::uint64_t seed = 42;

  nlohmann::json to_json() const;
  static PipelineConfig from_json(const nlohmann::json& j);
};

struct PreparedData {
  EncodedMatrix train;  // balanced if requested
  EncodedMatrix test;
  SplitIndices split;
  CategoricalEncoder encoder;
  Normalizer normalizer;
};

/// Encodes every record with a fitted encoder. Columns follow the schema
/// feature order, each categorical feature expanding in place to its one-hot
/// block (feature names "proto=tcp" and so on).
EncodedMatrix encode(const RawDataset& ds, const CategoricalEncoder& encoder, LabelMode mode);

/// split -> fit encoder on train rows -> encode -> fit normalizer on train
/// rows -> normalize all rows -> balance the train rows.
PreparedData prepare(const RawDataset& ds, const PipelineConfig& config);

}  // namespace botstack
