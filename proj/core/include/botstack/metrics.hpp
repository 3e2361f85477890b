#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "botstack/tensor.hpp"

namespace botstack {

/// counts(t, p): samples of true class t predicted as p.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(std::size_t classes);
  /// ValidationError (with the sample index) for a label outside [0, classes)
  /// or unequal lengths.
  static ConfusionMatrix from_labels(std::span<const int> truth, std::span<const int> predicted, std::size_t classes);

  void add(int truth, int predicted);

  std::size_t classes() const noexcept { return classes_; }
  std::size_t total() const noexcept { return total_; }
  std::size_t count(std::size_t truth, std::size_t predicted) const { return counts_[truth * classes_ + predicted]; }
  std::size_t row_sum(std::size_t c) const;
  std::size_t col_sum(std::size_t c) const;

  // One-vs-rest counts for class c.
  std::size_t tp(std::size_t c) const { return count(c, c); }
  std::size_t fn(std::size_t c) const { return row_sum(c) - tp(c); }
  std::size_t fp(std::size_t c) const { return col_sum(c) - tp(c); }
  std::size_t tn(std::size_t c) const { return total_ - tp(c) - fn(c) - fp(c); }

  nlohmann::json to_json() const;

 private:
  std::size_t classes_;
  std::size_t total_ = 0;
  std::vector<std::size_t> counts_;
};

/// binary: the ratios of class 1's counts (needs a 2x2 matrix).
/// macro: per-class ratios averaged with equal weight over all classes.
enum class Averaging { binary, macro };

std::string_view averaging_name(Averaging a);

/// A ratio whose denominator was zero is 0 and a note is appended to
/// `flags` when given. An empty matrix is an UndefinedMetricError.
double accuracy(const ConfusionMatrix& cm);
double precision(const ConfusionMatrix& cm, Averaging avg, std::vector<std::string>* flags = nullptr);
double recall(const ConfusionMatrix& cm, Averaging avg, std::vector<std::string>* flags = nullptr);
/// Per class 2PR / (P + R); macro mode averages the per-class F1 values.
double f1(const ConfusionMatrix& cm, Averaging avg, std::vector<std::string>* flags = nullptr);

double class_precision(const ConfusionMatrix& cm, std::size_t c, std::vector<std::string>* flags = nullptr);
double class_recall(const ConfusionMatrix& cm, std::size_t c, std::vector<std::string>* flags = nullptr);
double class_f1(const ConfusionMatrix& cm, std::size_t c, std::vector<std::string>* flags = nullptr);

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
  double threshold = 0.0;  // predict positive when score >= threshold
};

/// Threshold sweep from +infinity down through every distinct score, so tied
/// scores share one point. Starts at (0, 0) and ends at (1, 1). Labels are
/// 0/1. UndefinedMetricError unless both labels occur; ValidationError for a
/// non-finite score.
std::vector<RocPoint> roc_curve(std::span<const double> scores, std::span<const int> labels);

/// Trapezoidal area under a curve from roc_curve.
double auc(std::span<const RocPoint> curve);
/// The trapezoidal area of the score's curve, accumulated in exact integer
/// counts; equal to the pairwise ranking statistic with ties counted 1/2.
double roc_auc(std::span<const double> scores, std::span<const int> labels);

struct MulticlassAuc {
  double value = 0.0;
  std::vector<double> per_class;     // NaN for excluded classes
  std::vector<std::size_t> excluded;  // classes absent from the labels
};

/// One-vs-rest AUC with column c of `probabilities` as the score of class c,
/// averaged over the classes present in `labels`. Needs two present classes.
MulticlassAuc multiclass_auc(const Tensor& probabilities, std::span<const int> labels);

struct ClassMetrics {
  std::string name;
  std::size_t support = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::optional<double> auc;
};

struct MetricsReport {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::optional<double> roc_auc;
  Averaging averaging = Averaging::binary;
  std::vector<ClassMetrics> per_class;
  std::vector<std::string> flags;
  ConfusionMatrix confusion{2};
  std::vector<RocPoint> roc;  // binary: the curve; multiclass: empty

  /// Fields accuracy, precision, recall, f1, roc_auc, averaging, per_class,
  /// flags and confusion.
  nlohmann::json to_json() const;
};

/// Scores probabilities against true classes. One column means binary
/// (P(class 1) thresholded at 0.5, binary averaging); several columns mean
/// multiclass (argmax, macro averaging, one-vs-rest AUC).
MetricsReport evaluate_predictions(const Tensor& probabilities, std::span<const int> truth,
                                   const std::vector<std::string>& class_names);

}  // namespace botstack
