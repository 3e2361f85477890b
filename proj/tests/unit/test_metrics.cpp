#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "botstack/error.hpp"
#include "botstack/metrics.hpp"
#include "oracles.hpp"

using namespace botstack;

namespace {

ConfusionMatrix binary_counts(std::size_t tp, std::size_t tn, std::size_t fp, std::size_t fn) {
  std::vector<int> truth, pred;
  auto push = [&](std::size_t n, int t, int p) {
    for (std::size_t i = 0; i < n; ++i) {
      truth.push_back(t);
      pred.push_back(p);
    }
  };
  push(tp, 1, 1);
  push(tn, 0, 0);
  push(fp, 0, 1);
  push(fn, 1, 0);
  return ConfusionMatrix::from_labels(truth, pred, 2);
}

bool near(double a, double b, double tol) { return std::abs(a - b) <= tol; }

}  // namespace

TEST_CASE("confusion matrix basics") {
  const std::vector<int> y{0, 1, 2};
  const ConfusionMatrix cm = ConfusionMatrix::from_labels(y, y, 3);
  for (std::size_t t = 0; t < 3; ++t)
    for (std::size_t p = 0; p < 3; ++p) CHECK(cm.count(t, p) == (t == p ? 1u : 0u));
  for (std::size_t c = 0; c < 3; ++c) {
    CHECK(cm.fp(c) == 0);
    CHECK(cm.fn(c) == 0);
  }

  const ConfusionMatrix b = binary_counts(50, 40, 5, 5);
  CHECK(b.tp(1) == 50);
  CHECK(b.tn(1) == 40);
  CHECK(b.fp(1) == 5);
  CHECK(b.fn(1) == 5);
  CHECK(b.total() == 100);

  const std::vector<int> none;
  const ConfusionMatrix empty = ConfusionMatrix::from_labels(none, none, 4);
  CHECK(empty.total() == 0);
  CHECK_THROWS_AS(accuracy(empty), UndefinedMetricError);
  CHECK_THROWS_AS(precision(empty, Averaging::macro), UndefinedMetricError);

  const std::vector<int> bad_t{0, 1, 3}, bad_p{0, 1, 1};
  try {
    ConfusionMatrix::from_labels(bad_t, bad_p, 3);
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("2") != std::string::npos);
  }
  const std::vector<int> shorter{0, 1};
  CHECK_THROWS_AS(ConfusionMatrix::from_labels(bad_p, shorter, 3), ValidationError);
}

TEST_CASE("binary metric arithmetic") {
  const ConfusionMatrix cm = binary_counts(50, 40, 5, 5);
  CHECK(near(accuracy(cm), 0.90, 1e-15));
  CHECK(near(precision(cm, Averaging::binary), 50.0 / 55.0, 1e-15));
  CHECK(near(recall(cm, Averaging::binary), 50.0 / 55.0, 1e-15));
  CHECK(near(f1(cm, Averaging::binary), 50.0 / 55.0, 1e-15));

  const ConfusionMatrix perfect = binary_counts(7, 9, 0, 0);
  CHECK(accuracy(perfect) == 1.0);
  CHECK(precision(perfect, Averaging::binary) == 1.0);
  CHECK(recall(perfect, Averaging::binary) == 1.0);
  CHECK(f1(perfect, Averaging::binary) == 1.0);

  const ConfusionMatrix all_zero = binary_counts(0, 6, 0, 4);
  std::vector<std::string> flags;
  CHECK(precision(all_zero, Averaging::binary, &flags) == 0.0);
  CHECK_FALSE(flags.empty());
  flags.clear();
  CHECK(f1(all_zero, Averaging::binary, &flags) == 0.0);
  CHECK_FALSE(flags.empty());

  const ConfusionMatrix three = ConfusionMatrix::from_labels(std::vector<int>{0, 1, 2}, std::vector<int>{0, 1, 1}, 3);
  CHECK_THROWS(precision(three, Averaging::binary));
}

TEST_CASE("metrics agree with a counting oracle") {
  std::mt19937_64 rng(123);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t c = 2 + rng() % 9, n = 1 + rng() % 500;
    std::vector<int> truth(n), pred(n);
    for (std::size_t i = 0; i < n; ++i) {
      truth[i] = static_cast<int>(rng() % c);
      pred[i] = rng() % 3 == 0 ? truth[i] : static_cast<int>(rng() % c);
    }
    const ConfusionMatrix cm = ConfusionMatrix::from_labels(truth, pred, c);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < n; ++i) hits += truth[i] == pred[i];
    REQUIRE(near(accuracy(cm), static_cast<double>(hits) / static_cast<double>(n), 1e-12));
    double p_sum = 0.0, r_sum = 0.0, f_sum = 0.0;
    for (std::size_t k = 0; k < c; ++k) {
      const oracle::Counts o = oracle::count(truth, pred, static_cast<int>(k));
      REQUIRE(cm.tp(k) == o.tp);
      REQUIRE(cm.tn(k) == o.tn);
      REQUIRE(cm.fp(k) == o.fp);
      REQUIRE(cm.fn(k) == o.fn);
      const double p = oracle::safe_div(static_cast<double>(o.tp), static_cast<double>(o.tp + o.fp));
      const double r = oracle::safe_div(static_cast<double>(o.tp), static_cast<double>(o.tp + o.fn));
      p_sum += p;
      r_sum += r;
      f_sum += oracle::safe_div(2.0 * p * r, p + r);
    }
    const double dc = static_cast<double>(c);
    REQUIRE(near(precision(cm, Averaging::macro), p_sum / dc, 1e-12));
    REQUIRE(near(recall(cm, Averaging::macro), r_sum / dc, 1e-12));
    REQUIRE(near(f1(cm, Averaging::macro), f_sum / dc, 1e-12));
  }
}

TEST_CASE("roc curve examples") {
  const std::vector<double> s{0.9, 0.8, 0.3, 0.1};
  const std::vector<int> y{1, 1, 0, 0};
  const auto curve = roc_curve(s, y);
  const std::vector<std::pair<double, double>> want{{0, 0}, {0, 0.5}, {0, 1}, {0.5, 1}, {1, 1}};
  REQUIRE(curve.size() == want.size());
  for (std::size_t i = 0; i < want.size(); ++i) {
    CHECK(curve[i].fpr == want[i].first);
    CHECK(curve[i].tpr == want[i].second);
  }
  CHECK(curve.front().threshold == std::numeric_limits<double>::infinity());
  CHECK(auc(curve) == 1.0);

  const std::vector<double> flat(6, 0.4);
  const std::vector<int> mixed{1, 0, 1, 0, 0, 1};
  const auto two = roc_curve(flat, mixed);
  REQUIRE(two.size() == 2);
  CHECK(two[0].fpr == 0.0);
  CHECK(two[0].tpr == 0.0);
  CHECK(two[1].fpr == 1.0);
  CHECK(two[1].tpr == 1.0);
  CHECK(auc(two) == 0.5);

  CHECK(roc_auc(std::vector<double>{0.9, 0.4, 0.6, 0.1}, y) == 0.75);
  const std::vector<int> inverted{0, 0, 1, 1};
  CHECK(roc_auc(s, inverted) == 0.0);

  const std::vector<int> single{1, 1, 1, 1};
  CHECK_THROWS_AS(roc_curve(s, single), UndefinedMetricError);
  const std::vector<double> nan_scores{0.1, std::nan(""), 0.2, 0.3};
  CHECK_THROWS_AS(roc_curve(nan_scores, y), ValidationError);
}

TEST_CASE("auc equals the pairwise statistic") {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 + rng() % 200;
    const bool tied = trial % 2 == 1;
    std::vector<double> s(n);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = tied ? static_cast<double>(rng() % 7) / 7.0 : u(rng);
      y[i] = static_cast<int>(rng() % 2);
    }
    y[0] = 0;
    y[1] = 1;
    const auto curve = roc_curve(s, y);
    REQUIRE(curve.front().fpr == 0.0);
    REQUIRE(curve.front().tpr == 0.0);
    REQUIRE(curve.back().fpr == 1.0);
    REQUIRE(curve.back().tpr == 1.0);
    for (std::size_t i = 1; i < curve.size(); ++i) REQUIRE(curve[i].fpr >= curve[i - 1].fpr);
    const double a = auc(curve);
    REQUIRE(near(a, oracle::pairwise_auc(s, y), 1e-9));
    REQUIRE(near(roc_auc(s, y), oracle::pairwise_auc(s, y), 1e-12));

    std::vector<double> mapped(n), affine(n);
    for (std::size_t i = 0; i < n; ++i) {
      mapped[i] = std::exp(3.0 * s[i]);
      affine[i] = 2.5 * s[i] - 7.0;
    }
    REQUIRE(near(roc_auc(mapped, y), a, 1e-12));
    REQUIRE(near(roc_auc(affine, y), a, 1e-12));
    if (!tied) {
      std::vector<int> flipped(n);
      for (std::size_t i = 0; i < n; ++i) flipped[i] = 1 - y[i];
      REQUIRE(roc_auc(s, y) + roc_auc(s, flipped) == 1.0);
    }
  }
}

TEST_CASE("multiclass auc") {
  const std::vector<int> y{0, 1, 2, 2, 1, 0};
  Tensor onehot({6, 3});
  for (std::size_t i = 0; i < 6; ++i) onehot.set(i, static_cast<std::size_t>(y[i]), 1.0);
  CHECK(multiclass_auc(onehot, y).value == 1.0);
  const Tensor uniform({6, 3}, 1.0 / 3.0);
  CHECK(multiclass_auc(uniform, y).value == 0.5);

  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const Tensor p = oracle::random(rng, {40, 3}, 0.0, 1.0);
    std::vector<int> labels(40);
    for (std::size_t i = 0; i < 40; ++i) labels[i] = static_cast<int>(i % 3);
    double sum = 0.0;
    for (std::size_t c = 0; c < 3; ++c) {
      std::vector<double> s(40);
      std::vector<int> b(40);
      for (std::size_t i = 0; i < 40; ++i) {
        s[i] = p.at(i, c);
        b[i] = labels[i] == static_cast<int>(c);
      }
      sum += roc_auc(s, b);
    }
    CHECK(near(multiclass_auc(p, labels).value, sum / 3.0, 1e-12));
  }

  const std::vector<int> missing{0, 1, 0, 1, 0, 1};
  const MulticlassAuc m = multiclass_auc(onehot, missing);
  CHECK(m.excluded == std::vector<std::size_t>{2});
  CHECK(std::isnan(m.per_class[2]));
  const std::vector<int> one_class(6, 1);
  CHECK_THROWS_AS(multiclass_auc(onehot, one_class), UndefinedMetricError);
}

TEST_CASE("metrics report") {
  const Tensor p = Tensor::matrix({{0.9}, {0.2}, {0.7}, {0.4}, {0.6}});
  const std::vector<int> y{1, 0, 0, 0, 1};
  const MetricsReport r = evaluate_predictions(p, y, {"0", "1"});
  CHECK(r.averaging == Averaging::binary);
  CHECK(near(r.accuracy, 0.8, 1e-15));
  CHECK(near(r.precision, 2.0 / 3.0, 1e-15));
  CHECK(r.recall == 1.0);
  CHECK(near(r.f1, 0.8, 1e-15));
  REQUIRE(r.roc_auc.has_value());
  CHECK(near(*r.roc_auc, 5.0 / 6.0, 1e-15));
  const nlohmann::json j = r.to_json();
  for (const char* key : {"accuracy", "precision", "recall", "f1", "roc_auc", "averaging", "per_class", "flags"}) {
    CHECK(j.contains(key));
  }
  CHECK(j["averaging"] == "binary");

  const Tensor pm = Tensor::matrix({{0.7, 0.2, 0.1}, {0.1, 0.8, 0.1}, {0.3, 0.3, 0.4}, {0.5, 0.4, 0.1}});
  const std::vector<int> ym{0, 1, 2, 1};
  const MetricsReport rm = evaluate_predictions(pm, ym, {"a", "b", "c"});
  CHECK(rm.averaging == Averaging::macro);
  CHECK(near(rm.accuracy, 0.75, 1e-15));
  CHECK(rm.per_class.size() == 3);
  CHECK(rm.per_class[1].support == 2);
  // class a: P 1/2 R 1, class b: P 1 R 1/2, class c: P 1 R 1
  CHECK(near(rm.precision, (0.5 + 1.0 + 1.0) / 3.0, 1e-15));
  CHECK(near(rm.recall, (1.0 + 0.5 + 1.0) / 3.0, 1e-15));
  CHECK(near(rm.f1, (2.0 / 3.0 + 2.0 / 3.0 + 1.0) / 3.0, 1e-15));
  for (double v : {rm.accuracy, rm.precision, rm.recall, rm.f1, *rm.roc_auc}) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
}
