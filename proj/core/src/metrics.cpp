#include "botstack/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>

#include "botstack/error.hpp"
#include "botstack/model.hpp"

namespace botstack {

ConfusionMatrix::ConfusionMatrix(std::size_t classes) : classes_(classes), counts_(classes * classes, 0) {
  if (classes == 0) throw UsageError("confusion matrix needs at least one class");
}

ConfusionMatrix ConfusionMatrix::from_labels(std::span<const int> truth, std::span<const int> predicted,
                                             std::size_t classes) {
  if (truth.size() != predicted.size()) {
    throw ValidationError("label count " + std::to_string(truth.size()) + " differs from prediction count " +
                          std::to_string(predicted.size()));
  }
  ConfusionMatrix cm(classes);
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const auto out_of_range = [&](int v) { return v < 0 || static_cast<std::size_t>(v) >= classes; };
    if (out_of_range(truth[i]) || out_of_range(predicted[i])) {
      throw ValidationError("label out of range [0, " + std::to_string(classes) + ") at index " + std::to_string(i));
    }
    cm.add(truth[i], predicted[i]);
  }
  return cm;
}

void ConfusionMatrix::add(int truth, int predicted) {
  ++counts_[static_cast<std::size_t>(truth) * classes_ + static_cast<std::size_t>(predicted)];
  ++total_;
}

std::size_t ConfusionMatrix::row_sum(std::size_t c) const {
  std::size_t s = 0;
  for (std::size_t p = 0; p < classes_; ++p) s += count(c, p);
  return s;
}

std::size_t ConfusionMatrix::col_sum(std::size_t c) const {
  std::size_t s = 0;
  for (std::size_t t = 0; t < classes_; ++t) s += count(t, c);
  return s;
}

nlohmann::json ConfusionMatrix::to_json() const {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t t = 0; t < classes_; ++t) {
    std::vector<std::size_t> r(classes_);
    for (std::size_t p = 0; p < classes_; ++p) r[p] = count(t, p);
    rows.push_back(r);
  }
  return rows;
}

std::string_view averaging_name(Averaging a) { return a == Averaging::binary ? "binary" : "macro"; }

namespace {

void require_nonempty(const ConfusionMatrix& cm) {
  if (cm.total() == 0) throw UndefinedMetricError("metrics are undefined on an empty confusion matrix");
}

double ratio(std::size_t num, std::size_t den, const char* what, std::size_t c, std::vector<std::string>* flags) {
  if (den == 0) {
    if (flags) flags->push_back(std::string(what) + "[" + std::to_string(c) + "]: 0/0 set to 0");
    return 0.0;
  }
  return static_cast<double>(num) / static_cast<double>(den);
}

template <class PerClass>
double averaged(const ConfusionMatrix& cm, Averaging avg, PerClass per_class) {
  require_nonempty(cm);
  if (avg == Averaging::binary) {
    if (cm.classes() != 2) throw UsageError("binary averaging needs exactly two classes");
    return per_class(1);
  }
  double s = 0.0;
  for (std::size_t c = 0; c < cm.classes(); ++c) s += per_class(c);
  return s / static_cast<double>(cm.classes());
}

}  // namespace

double accuracy(const ConfusionMatrix& cm) {
  require_nonempty(cm);
  std::size_t diag = 0;
  for (std::size_t c = 0; c < cm.classes(); ++c) diag += cm.tp(c);
  return static_cast<double>(diag) / static_cast<double>(cm.total());
}

double class_precision(const ConfusionMatrix& cm, std::size_t c, std::vector<std::string>* flags) {
  return ratio(cm.tp(c), cm.tp(c) + cm.fp(c), "precision", c, flags);
}

double class_recall(const ConfusionMatrix& cm, std::size_t c, std::vector<std::string>* flags) {
  return ratio(cm.tp(c), cm.tp(c) + cm.fn(c), "recall", c, flags);
}

double class_f1(const ConfusionMatrix& cm, std::size_t c, std::vector<std::string>* flags) {
  const double p = class_precision(cm, c, flags);
  const double r = class_recall(cm, c, flags);
  if (p + r == 0.0) {
    if (flags) flags->push_back("f1[" + std::to_string(c) + "]: 0/0 set to 0");
    return 0.0;
  }
  return 2.0 * p * r / (p + r);
}

double precision(const ConfusionMatrix& cm, Averaging avg, std::vector<std::string>* flags) {
  return averaged(cm, avg, [&](std::size_t c) { return class_precision(cm, c, flags); });
}

double recall(const ConfusionMatrix& cm, Averaging avg, std::vector<std::string>* flags) {
  return averaged(cm, avg, [&](std::size_t c) { return class_recall(cm, c, flags); });
}

double f1(const ConfusionMatrix& cm, Averaging avg, std::vector<std::string>* flags) {
  return averaged(cm, avg, [&](std::size_t c) { return class_f1(cm, c, flags); });
}

namespace {

// Cumulative (fp, tp) after each distinct score, highest score first.
struct Sweep {
  std::size_t pos = 0, neg = 0;
  std::vector<std::size_t> fp, tp;
  std::vector<double> threshold;
};

Sweep sweep(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw ValidationError("score and label counts differ");
  Sweep w;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 0 && labels[i] != 1) throw ValidationError("ROC labels must be 0 or 1 (index " + std::to_string(i) + ")");
    if (!std::isfinite(scores[i])) throw ValidationError("non-finite score at index " + std::to_string(i));
    w.pos += labels[i] == 1;
  }
  w.neg = labels.size() - w.pos;
  if (w.pos == 0 || w.neg == 0) throw UndefinedMetricError("ROC curve needs both positive and negative samples");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  std::size_t tp = 0, fp = 0;
  for (std::size_t k = 0; k < order.size();) {
    const double s = scores[order[k]];
    while (k < order.size() && scores[order[k]] == s) {
      (labels[order[k]] == 1 ? tp : fp) += 1;
      ++k;
    }
    w.fp.push_back(fp);
    w.tp.push_back(tp);
    w.threshold.push_back(s);
  }
  return w;
}

}  // namespace

std::vector<RocPoint> roc_curve(std::span<const double> scores, std::span<const int> labels) {
  const Sweep w = sweep(scores, labels);
  std::vector<RocPoint> curve;
  curve.push_back({0.0, 0.0, std::numeric_limits<double>::infinity()});
  for (std::size_t i = 0; i < w.fp.size(); ++i) {
    curve.push_back({static_cast<double>(w.fp[i]) / static_cast<double>(w.neg),
                     static_cast<double>(w.tp[i]) / static_cast<double>(w.pos), w.threshold[i]});
  }
  return curve;
}

double auc(std::span<const RocPoint> curve) {
  if (curve.size() < 2) throw UndefinedMetricError("AUC needs a curve of at least two points");
  double area = 0.0;
  for (std::size_t i = 1; i < curve.size(); ++i) {
    area += (curve[i].fpr - curve[i - 1].fpr) * (curve[i].tpr + curve[i - 1].tpr) / 2.0;
  }
  return area;
}

// The same trapezoids summed in integer counts with a single division, so
// the result is the correctly rounded area.
double roc_auc(std::span<const double> scores, std::span<const int> labels) {
  const Sweep w = sweep(scores, labels);
  std::uint64_t twice_area = 0, fp_prev = 0, tp_prev = 0;
  for (std::size_t i = 0; i < w.fp.size(); ++i) {
    twice_area += (w.fp[i] - fp_prev) * (w.tp[i] + tp_prev);
    fp_prev = w.fp[i];
    tp_prev = w.tp[i];
  }
  return static_cast<double>(twice_area) / (2.0 * static_cast<double>(w.pos) * static_cast<double>(w.neg));
}

MulticlassAuc multiclass_auc(const Tensor& probabilities, std::span<const int> labels) {
  const std::size_t n = probabilities.rows(), c = probabilities.cols();
  if (n != labels.size()) throw ValidationError("probability and label counts differ");
  std::vector<std::size_t> support(c, 0);
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= c) {
      throw ValidationError("label out of range at index " + std::to_string(i));
    }
    ++support[static_cast<std::size_t>(labels[i])];
  }
  MulticlassAuc out;
  out.per_class.assign(c, std::numeric_limits<double>::quiet_NaN());
  std::size_t present = 0;
  double total = 0.0;
  std::vector<double> scores(n);
  std::vector<int> binary(n);
  for (std::size_t k = 0; k < c; ++k) {
    if (support[k] == 0) {
      out.excluded.push_back(k);
      continue;
    }
    for (std::size_t i = 0; i < n; ++i) {
      scores[i] = probabilities.at(i, k);
      binary[i] = labels[i] == static_cast<int>(k) ? 1 : 0;
    }
    if (support[k] == n) throw UndefinedMetricError("one-vs-rest AUC needs at least two classes present");
    out.per_class[k] = roc_auc(scores, binary);
    total += out.per_class[k];
    ++present;
  }
  if (present < 2) throw UndefinedMetricError("one-vs-rest AUC needs at least two classes present");
  out.value = total / static_cast<double>(present);
  return out;
}

nlohmann::json MetricsReport::to_json() const {
  nlohmann::json classes = nlohmann::json::array();
  for (const ClassMetrics& m : per_class) {
    classes.push_back({{"class", m.name},
                       {"support", m.support},
                       {"precision", m.precision},
                       {"recall", m.recall},
                       {"f1", m.f1},
                       {"roc_auc", m.auc ? nlohmann::json(*m.auc) : nlohmann::json(nullptr)}});
  }
  return {{"accuracy", accuracy},
          {"precision", precision},
          {"recall", recall},
          {"f1", f1},
          {"roc_auc", roc_auc ? nlohmann::json(*roc_auc) : nlohmann::json(nullptr)},
          {"averaging", averaging_name(averaging)},
          {"per_class", classes},
          {"flags", flags},
          {"confusion", confusion.to_json()}};
}

MetricsReport evaluate_predictions(const Tensor& probabilities, std::span<const int> truth,
                                   const std::vector<std::string>& class_names) {
  if (probabilities.rank() != 2 || probabilities.rows() != truth.size()) {
    throw DimensionError("predictions " + to_string(probabilities.shape()) + " do not match " +
                         std::to_string(truth.size()) + " labels");
  }
  const bool binary = probabilities.cols() == 1;
  const std::size_t classes = binary ? 2 : probabilities.cols();
  if (class_names.size() != classes) throw UsageError("class name count does not match the predictions");

  MetricsReport r;
  r.averaging = binary ? Averaging::binary : Averaging::macro;
  r.confusion = ConfusionMatrix::from_labels(truth, predict_classes(probabilities), classes);
  r.accuracy = botstack::accuracy(r.confusion);
  r.precision = botstack::precision(r.confusion, r.averaging, &r.flags);
  r.recall = botstack::recall(r.confusion, r.averaging, &r.flags);
  r.f1 = botstack::f1(r.confusion, r.averaging, &r.flags);
  std::sort(r.flags.begin(), r.flags.end());
  r.flags.erase(std::unique(r.flags.begin(), r.flags.end()), r.flags.end());

  std::vector<double> per_class_auc(classes, std::numeric_limits<double>::quiet_NaN());
  try {
    if (binary) {
      r.roc = roc_curve(probabilities.data(), truth);
      r.roc_auc = roc_auc(probabilities.data(), truth);
    } else {
      const MulticlassAuc m = multiclass_auc(probabilities, truth);
      r.roc_auc = m.value;
      per_class_auc = m.per_class;
      for (std::size_t k : m.excluded) r.flags.push_back("roc_auc: class " + class_names[k] + " absent, excluded");
    }
  } catch (const UndefinedMetricError& e) {
    r.flags.push_back(std::string("roc_auc: ") + e.what());
  }

  for (std::size_t c = 0; c < classes; ++c) {
    ClassMetrics m;
    m.name = class_names[c];
    m.support = r.confusion.row_sum(c);
    m.precision = class_precision(r.confusion, c);
    m.recall = class_recall(r.confusion, c);
    m.f1 = class_f1(r.confusion, c);
    if (!binary && !std::isnan(per_class_auc[c])) m.auc = per_class_auc[c];
    r.per_class.push_back(m);
  }
  return r;
}

}  // namespace botstack
