#include "botstack/stacking.hpp"

#include <algorithm>
#include <chrono>
#include <unordered_map>
#include <unordered_set>

#include "botstack/checksum.hpp"
#include "botstack/error.hpp"
#include "botstack/rng.hpp"

namespace botstack {
namespace {

std::string base_context(const std::string& base, std::size_t fold) {
  return "base '" + base + "'" + (fold == 0 ? std::string() : " fold " + std::to_string(fold));
}

}  // namespace

std::vector<std::size_t> FoldPlan::rows_in(std::size_t fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < fold_of_row.size(); ++i) {
    if (fold_of_row[i] == fold) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> FoldPlan::rows_outside(std::size_t fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < fold_of_row.size(); ++i) {
    if (fold_of_row[i] != fold) out.push_back(i);
  }
  return out;
}

FoldPlan assign_folds(const EncodedMatrix& data, std::size_t folds, std::uint64_t seed) {
  if (folds < 2) throw FoldError("need at least two folds");
  // Distinct origins per class, in first-appearance order.
  std::vector<std::vector<std::size_t>> groups(data.class_count);
  std::unordered_set<std::size_t> seen;
  for (std::size_t i = 0; i < data.rows(); ++i) {
    if (seen.insert(data.origin[i]).second) groups[static_cast<std::size_t>(data.classes[i])].push_back(data.origin[i]);
  }
  for (std::size_t c = 0; c < groups.size(); ++c) {
    if (!groups[c].empty() && groups[c].size() < folds) {
      throw FoldError(std::to_string(folds) + " folds exceed the " + std::to_string(groups[c].size()) +
                      " distinct rows of class " + std::to_string(c));
    }
  }
  Rng rng(derive_seed(seed, {0xf01du}));
  std::unordered_map<std::size_t, std::size_t> fold_of_origin;
  std::size_t offset = 0;
  for (auto& g : groups) {
    rng.shuffle(g);
    for (std::size_t k = 0; k < g.size(); ++k) fold_of_origin[g[k]] = (offset + k) % folds;
    offset += g.size();
  }
  FoldPlan plan;
  plan.folds = folds;
  plan.fold_of_row.resize(data.rows());
  for (std::size_t i = 0; i < data.rows(); ++i) plan.fold_of_row[i] = fold_of_origin.at(data.origin[i]);
  return plan;
}

StackedModel::StackedModel(ModelConfig config, std::vector<Model> bases, Model meta)
    : config_(std::move(config)), bases_(std::move(bases)), meta_(std::move(meta)) {
  if (bases_.empty()) throw ConfigError("stacked model without base models");
  std::size_t width = 0;
  for (const Model& b : bases_) {
    if (b.input_width() != bases_.front().input_width()) throw ConfigError("base models disagree on input width");
    width += b.output_width();
  }
  if (meta_.input_width() != width) {
    throw ConfigError("meta-learner input width " + std::to_string(meta_.input_width()) +
                      " differs from the base output total " + std::to_string(width));
  }
}

Tensor StackedModel::meta_features(const Tensor& x) const {
  std::vector<Tensor> parts;
  std::size_t width = 0;
  for (const Model& b : bases_) {
    parts.push_back(b.predict_proba(x));
    width += parts.back().cols();
  }
  const std::size_t n = x.rows();
  Tensor out({n, width});
  for (std::size_t i = 0; i < n; ++i) {
    auto row = out.row(i);
    std::size_t col = 0;
    for (const Tensor& p : parts) {
      const auto src = p.row(i);
      std::copy(src.begin(), src.end(), row.begin() + static_cast<std::ptrdiff_t>(col));
      col += src.size();
    }
  }
  return out;
}

Tensor StackedModel::predict_proba(const Tensor& x) const { return meta_.predict_proba(meta_features(x)); }

std::uint64_t StackedModel::checksum() const {
  std::uint64_t h = kFnvOffset;
  for (const Model& b : bases_) h = fnv1a64(hex64(b.checksum()), h);
  return fnv1a64(hex64(meta_.checksum()), h);
}

std::size_t StackedModel::parameter_count() const {
  std::size_t n = meta_.parameter_count();
  for (const Model& b : bases_) n += b.parameter_count();
  return n;
}

nlohmann::json StackedModel::summary_json() const {
  nlohmann::json bases = nlohmann::json::array();
  std::size_t layers = 0;
  for (const Model& b : bases_) {
    bases.push_back(b.summary_json());
    layers += b.summary().size();
  }
  layers += meta_.summary().size();
  return {{"model", config_.name},
          {"kind", "stacked"},
          {"declared_layers", config_.layers},
          {"built_layers", layers},
          {"bases", bases},
          {"meta", meta_.summary_json()},
          {"total_params", parameter_count()}};
}

ModelConfig meta_config(const ModelConfig& stacked) {
  ModelConfig m;
  m.name = stacked.name + "/meta";
  m.kind = ModelKind::ann;
  m.units = stacked.units;
  m.layers = stacked.units.size();
  m.activations = stacked.activations;
  m.optimizer = stacked.optimizer;
  m.epochs = stacked.epochs;
  m.batch_size = stacked.batch_size;
  m.head = stacked.head;
  m.seed = derive_seed(stacked.seed, {0x3e7au});
  return m;
}

StackedTrainResult train_stacked(const ModelConfig& config, const EncodedMatrix& data, const TrainOptions& options) {
  using clock = std::chrono::steady_clock;
  config.validate();
  if (config.kind != ModelKind::stacked) throw ConfigError("train_stacked needs a stacked config");
  const auto start = clock::now();
  const std::size_t n = data.rows(), f = data.features();

  StackingRecord record;
  record.plan = assign_folds(data, config.folds, config.seed);
  std::size_t meta_width = 0;
  for (const ModelConfig& b : config.bases) meta_width += b.head_width();
  record.meta_features = Tensor({n, meta_width});
  record.trained_rows.assign(config.bases.size(), {});

  TrainOptions quiet;
  quiet.evaluate_each_epoch = false;

  std::size_t col = 0;
  for (std::size_t b = 0; b < config.bases.size(); ++b) {
    const ModelConfig& base = config.bases[b];
    const std::size_t w = base.head_width();
    for (std::size_t k = 0; k < record.plan.folds; ++k) {
      const std::vector<std::size_t> fit_rows = record.plan.rows_outside(k);
      const std::vector<std::size_t> held = record.plan.rows_in(k);
      with_context(base_context(base.name, k + 1), [&] {
        ModelConfig fold_cfg = base;
        fold_cfg.seed = derive_seed(base.seed, {0xf0u, k});
        Model m(fold_cfg, f);
        train(m, data.select(fit_rows), quiet);
        const Tensor p = m.predict_proba(data.select(held).x);
        for (std::size_t r = 0; r < held.size(); ++r) {
          for (std::size_t j = 0; j < w; ++j) record.meta_features.set(held[r], col + j, p.at(r, j));
        }
        return 0;
      });
      record.trained_rows[b].push_back(fit_rows);
    }
    col += w;
  }

  EncodedMatrix meta_data;
  meta_data.x = record.meta_features;
  meta_data.targets = data.targets;
  meta_data.classes = data.classes;
  meta_data.origin = data.origin;
  meta_data.mode = data.mode;
  meta_data.class_count = data.class_count;
  for (const ModelConfig& b : config.bases) {
    for (std::size_t j = 0; j < b.head_width(); ++j) meta_data.feature_names.push_back(b.name + ":p" + std::to_string(j));
  }

  Model meta(meta_config(config), meta_width);
  TrainReport meta_report = train(meta, meta_data, options);

  std::vector<Model> finals;
  std::vector<TrainReport> base_reports;
  for (const ModelConfig& base : config.bases) {
    with_context(base_context(base.name, 0), [&] {
      Model m(base, f);
      base_reports.push_back(train(m, data, quiet));
      finals.push_back(std::move(m));
      return 0;
    });
  }

  StackedModel model(config, std::move(finals), std::move(meta));
  TrainReport report;
  report.model = config.name;
  report.config = config;
  report.seed = config.seed;
  report.epochs = meta_report.epochs;
  report.train_rows = n;
  report.bases = std::move(base_reports);
  report.final_train_accuracy = accuracy_of(model.predict_proba(data.x), data.classes);
  report.checksum = model.checksum();
  report.seconds = std::chrono::duration<double>(clock::now() - start).count();
  return StackedTrainResult{std::move(model), std::move(report), std::move(record)};
}

bool out_of_fold_ok(const StackingRecord& record, const EncodedMatrix& data) {
  if (record.plan.fold_of_row.size() != data.rows()) return false;
  for (const auto& per_fold : record.trained_rows) {
    if (per_fold.size() != record.plan.folds) return false;
    for (std::size_t k = 0; k < per_fold.size(); ++k) {
      std::unordered_set<std::size_t> seen_origins;
      for (std::size_t r : per_fold[k]) seen_origins.insert(data.origin.at(r));
      for (std::size_t i = 0; i < data.rows(); ++i) {
        if (record.plan.fold_of_row[i] == k && seen_origins.count(data.origin[i])) return false;
      }
    }
  }
  return true;
}

}  // namespace botstack
