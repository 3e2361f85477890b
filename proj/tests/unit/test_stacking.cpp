#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "botstack/error.hpp"
#include "botstack/model_io.hpp"
#include "botstack/presets.hpp"
#include "botstack/stacking.hpp"
#include "synthetic.hpp"

using namespace botstack;

namespace {

ModelConfig base(const std::string& name, ModelKind kind, std::vector<std::size_t> units, Head head, std::size_t epochs) {
  ModelConfig c;
  c.name = name;
  c.kind = kind;
  c.units = std::move(units);
  c.activations = {kind == ModelKind::ann || kind == ModelKind::cnn ? Activation::relu : Activation::tanh};
  c.conv_channels = {4};
  c.layers = kind == ModelKind::cnn ? 2 * c.conv_channels.size() + c.units.size() - 1 : c.units.size();
  c.optimizer = OptimizerConfig::defaults(OptimizerKind::adam);
  c.optimizer.learning_rate = 0.01;
  c.epochs = epochs;
  c.batch_size = 32;
  c.head = head;
  c.seed = 100 + c.units.front();
  return c;
}

ModelConfig four_bases(Head head, std::size_t width, std::size_t epochs, std::uint64_t seed = 42) {
  ModelConfig s;
  s.name = "stack";
  s.kind = ModelKind::stacked;
  s.layers = 18;
  s.units = {8, width};
  s.activations = {Activation::relu};
  s.optimizer = OptimizerConfig::defaults(OptimizerKind::adagrad);
  s.optimizer.learning_rate = 0.05;
  s.epochs = epochs;
  s.batch_size = 32;
  s.head = head;
  s.seed = seed;
  s.folds = 3;
  s.bases = {base("ann", ModelKind::ann, {8, width}, head, epochs), base("cnn", ModelKind::cnn, {6, width}, head, epochs),
             base("bilstm", ModelKind::bilstm, {3, width}, head, epochs),
             base("rnn", ModelKind::rnn, {5, width}, head, epochs)};
  return s;
}

}  // namespace

TEST_CASE("meta features are out of fold and shaped N x sum of widths") {
  const EncodedMatrix data = synthetic::two_blobs(90, 5, 3.0, 1);
  const StackedTrainResult r = train_stacked(four_bases(Head::sigmoid, 1, 3), data);
  CHECK(r.record.meta_features.shape() == Shape{90, 4});
  CHECK(out_of_fold_ok(r.record, data));
  CHECK(r.model.bases().size() == 4);
  CHECK(r.model.meta().input_width() == 4);
  CHECK(r.report.epochs.size() == 3);
  CHECK(r.report.bases.size() == 4);

  // Fold bookkeeping checked directly: the rows that trained the model for
  // fold k are exactly the rows outside k.
  for (const auto& per_fold : r.record.trained_rows) {
    REQUIRE(per_fold.size() == 3);
    std::size_t covered = 0;
    for (std::size_t k = 0; k < 3; ++k) {
      const std::set<std::size_t> trained(per_fold[k].begin(), per_fold[k].end());
      for (std::size_t i = 0; i < data.rows(); ++i) {
        const bool held = r.record.plan.fold_of_row[i] == k;
        CHECK(held != (trained.count(i) == 1));
        covered += held;
      }
    }
    CHECK(covered == data.rows());
  }
}

TEST_CASE("oversampled copies share a fold") {
  EncodedMatrix data = synthetic::blobs(60, 3, 4, 3.0, 2, LabelMode::multiclass);
  std::vector<std::size_t> pick;
  for (std::size_t i = 0; i < 60; ++i) pick.push_back(i);
  for (std::size_t i = 0; i < 60; i += 3) pick.push_back(i);  // duplicate class 0 rows
  const EncodedMatrix dup = data.select(pick);
  const FoldPlan plan = assign_folds(dup, 5, 9);
  for (std::size_t i = 60; i < dup.rows(); ++i) CHECK(plan.fold_of_row[i] == plan.fold_of_row[pick[i]]);
  for (std::size_t k = 0; k < 5; ++k) {
    std::vector<std::size_t> per_class(3, 0);
    for (std::size_t i = 0; i < 60; ++i) per_class[static_cast<std::size_t>(dup.classes[i])] += plan.fold_of_row[i] == k;
    for (std::size_t c : per_class) CHECK(c == 4);
  }
  CHECK(assign_folds(dup, 5, 9).fold_of_row == plan.fold_of_row);
}

TEST_CASE("more folds than the smallest class is a fold error") {
  std::vector<int> y(20, 0);
  y[3] = 1;
  y[11] = 1;
  Tensor x({20, 2});
  const EncodedMatrix data = synthetic::from_rows(x, y, LabelMode::binary, 2);
  CHECK_THROWS_AS(assign_folds(data, 3, 1), FoldError);
  CHECK_NOTHROW(assign_folds(data, 2, 1));
  ModelConfig c = four_bases(Head::sigmoid, 1, 1);
  c.folds = 3;
  CHECK_THROWS_AS(train_stacked(c, data), FoldError);
}

TEST_CASE("a failing base names itself") {
  const EncodedMatrix data = synthetic::two_blobs(40, 2, 3.0, 1);
  ModelConfig c = four_bases(Head::sigmoid, 1, 1);
  c.bases[1].pool = 5;  // longer than the two-step input
  try {
    train_stacked(c, data);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("base 'cnn'") != std::string::npos);
  }
}

TEST_CASE("stacked prediction equals manual composition") {
  const EncodedMatrix data = synthetic::blobs(150, 3, 6, 2.5, 5, LabelMode::multiclass);
  const StackedTrainResult r = train_stacked(four_bases(Head::softmax, 3, 3), data);
  const StackedModel& sm = r.model;
  const Tensor p = sm.predict_proba(data.x);
  CHECK(p.shape() == Shape{150, 3});

  Tensor concat({150, 12});
  std::size_t col = 0;
  for (const Model& b : sm.bases()) {
    const Tensor bp = b.predict_proba(data.x);
    for (std::size_t i = 0; i < 150; ++i)
      for (std::size_t j = 0; j < bp.cols(); ++j) concat.set(i, col + j, bp.at(i, j));
    col += bp.cols();
  }
  const Tensor manual = sm.meta().predict_proba(concat);
  CHECK(max_abs_diff(manual, p) <= 1e-12);
  for (std::size_t i = 0; i < 150; ++i) {
    double s = 0.0;
    for (double v : p.row(i)) s += v;
    CHECK(std::abs(s - 1.0) < 1e-6);
  }
  CHECK(r.report.final_train_accuracy == accuracy_of(p, data.classes));
}

TEST_CASE("stacked training is deterministic") {
  const EncodedMatrix data = synthetic::two_blobs(80, 4, 2.0, 3);
  const ModelConfig c = four_bases(Head::sigmoid, 1, 2, 17);
  const StackedTrainResult a = train_stacked(c, data), b = train_stacked(c, data);
  CHECK(a.model.predict_proba(data.x) == b.model.predict_proba(data.x));
  CHECK(a.model.checksum() == b.model.checksum());
  CHECK(a.record.meta_features == b.record.meta_features);
}

TEST_CASE("perfect identical bases give a perfect stack") {
  const EncodedMatrix train_set = synthetic::two_blobs(120, 3, 12.0, 4);
  const EncodedMatrix test_set = synthetic::two_blobs(60, 3, 12.0, 5);
  ModelConfig c = four_bases(Head::sigmoid, 1, 15);
  for (std::size_t i = 1; i < c.bases.size(); ++i) {
    const std::string name = "ann" + std::to_string(i);
    c.bases[i] = c.bases[0];
    c.bases[i].name = name;
  }
  const StackedTrainResult r = train_stacked(c, train_set);
  for (const Model& b : r.model.bases()) REQUIRE(accuracy_of(b.predict_proba(test_set.x), test_set.classes) == 1.0);
  CHECK(accuracy_of(r.model.predict_proba(test_set.x), test_set.classes) == 1.0);
}

TEST_CASE("stacked files keep base order") {
  const EncodedMatrix data = synthetic::blobs(90, 3, 5, 2.0, 6, LabelMode::multiclass);
  const StackedTrainResult r = train_stacked(four_bases(Head::softmax, 3, 2), data);
  const std::string bytes = serialize_model(r.model);
  const AnyModel back = deserialize_model(bytes);
  REQUIRE(std::holds_alternative<StackedModel>(back));
  const StackedModel& loaded = std::get<StackedModel>(back);
  REQUIRE(loaded.bases().size() == 4);
  for (std::size_t i = 0; i < 4; ++i) CHECK(loaded.bases()[i].config().name == r.model.bases()[i].config().name);
  CHECK(predict_proba(back, data.x) == r.model.predict_proba(data.x));
  CHECK(serialize_model(back) == bytes);

  // The meta-learner reads base outputs by position, so a swap changes the
  // prediction; the loaded model must therefore have kept the order.
  std::vector<Model> swapped = r.model.bases();
  std::swap(swapped[0], swapped[3]);
  const StackedModel other(r.model.config(), swapped, r.model.meta());
  CHECK(other.predict_proba(data.x) != r.model.predict_proba(data.x));

  CHECK_THROWS_AS(deserialize_model(bytes.substr(0, bytes.size() - 9)), IntegrityError);
}

TEST_CASE("default membership builds from the preset") {
  const ModelConfig c = preset("proposed-adagrad-25", LabelMode::binary, 42);
  REQUIRE(c.bases.size() == 4);
  CHECK(c.bases[0].kind == ModelKind::ann);
  CHECK(c.bases[1].kind == ModelKind::cnn);
  CHECK(c.bases[2].kind == ModelKind::bilstm);
  CHECK(c.bases[3].kind == ModelKind::rnn);
  CHECK(c.units == std::vector<std::size_t>{64, 32, 1});
  CHECK(c.activations == std::vector<Activation>{Activation::relu, Activation::sigmoid});
  CHECK(c.optimizer.kind == OptimizerKind::adagrad);
  CHECK(c.epochs == 25);
  CHECK(c.folds == 5);
  const ModelConfig meta = meta_config(c);
  CHECK(meta.kind == ModelKind::ann);
  CHECK(meta.units == std::vector<std::size_t>{64, 32, 1});

  const ModelConfig alt = make_stacked("alt", {Activation::relu}, OptimizerKind::adam, 5, LabelMode::multiclass, 1, 10,
                                       StackVariant::cnn_bilstm_bigru_rnn);
  REQUIRE(alt.bases.size() == 4);
  CHECK(alt.bases[0].kind == ModelKind::cnn);
  CHECK(alt.bases[2].kind == ModelKind::bigru);
  for (const ModelConfig& b : alt.bases) CHECK(b.head_width() == 10);
}
