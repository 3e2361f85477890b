#include "botstack/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "botstack/checksum.hpp"
#include "botstack/error.hpp"
#include "botstack/layers.hpp"
#include "botstack/rng.hpp"

namespace botstack {

nlohmann::json TrainReport::to_json() const {
  nlohmann::json eps = nlohmann::json::array();
  for (const EpochStats& e : epochs) {
    eps.push_back({{"epoch", e.epoch},
                   {"loss", e.loss},
                   {"accuracy", std::isnan(e.accuracy) ? nlohmann::json(nullptr) : nlohmann::json(e.accuracy)},
                   {"running_accuracy", e.running_accuracy},
                   {"seconds", e.seconds}});
  }
  nlohmann::json j{{"model", model},
                   {"config", config.to_json()},
                   {"seed", seed},
                   {"epochs", eps},
                   {"training_seconds", seconds},
                   {"final_train_accuracy", final_train_accuracy},
                   {"parameter_checksum", hex64(checksum)},
                   {"train_rows", train_rows},
                   {"precision", "double"},
                   {"clip_norm", config.optimizer.clip_norm ? nlohmann::json(*config.optimizer.clip_norm)
                                                            : nlohmann::json(nullptr)}};
  if (!bases.empty()) {
    nlohmann::json b = nlohmann::json::array();
    for (const TrainReport& r : bases) b.push_back(r.to_json());
    j["bases"] = b;
  }
  return j;
}

void check_compatible(const ModelConfig& config, std::size_t input_width, const EncodedMatrix& data) {
  if (data.features() != input_width || data.x.cols() != input_width) {
    throw UsageError("model '" + config.name + "' expects " + std::to_string(input_width) + " features, data has " +
                     std::to_string(data.x.cols()));
  }
  const bool binary_head = config.head == Head::sigmoid;
  if (binary_head != (data.mode == LabelMode::binary)) {
    throw UsageError("model '" + config.name + "' has a " + std::string(head_name(config.head)) +
                     " head but the data is in " + std::string(label_mode_name(data.mode)) + " mode");
  }
  if (!binary_head && config.head_width() != data.class_count) {
    throw ConfigError("model '" + config.name + "' predicts " + std::to_string(config.head_width()) +
                     " classes, data has " + std::to_string(data.class_count));
  }
}

TrainReport train(Model& model, const EncodedMatrix& data, const TrainOptions& options) {
  using clock = std::chrono::steady_clock;
  const ModelConfig& cfg = model.config();
  check_compatible(cfg, model.input_width(), data);

  TrainReport report;
  report.model = cfg.name;
  report.config = cfg;
  report.seed = cfg.seed;
  report.train_rows = data.rows();

  std::vector<Parameter>& params = model.parameters();
  Optimizer optimizer(cfg.optimizer, params);
  const std::size_t n = data.rows(), f = data.x.cols(), t = data.targets.cols();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(derive_seed(cfg.seed, {0x5f1eu}));

  const auto start = clock::now();
  std::vector<Tensor> grads(params.size());
  for (std::size_t epoch = 1; epoch <= cfg.epochs && n > 0; ++epoch) {
    rng.shuffle(order);
    double loss_sum = 0.0;
    std::size_t batches = 0, hits = 0;
    for (std::size_t b0 = 0; b0 < n; b0 += cfg.batch_size) {
      const std::size_t rows = std::min(cfg.batch_size, n - b0);
      std::vector<double> xs(rows * f), ys(rows * t);
      for (std::size_t r = 0; r < rows; ++r) {
        const auto xr = data.x.row(order[b0 + r]);
        const auto yr = data.targets.row(order[b0 + r]);
        std::copy(xr.begin(), xr.end(), xs.begin() + static_cast<std::ptrdiff_t>(r * f));
        std::copy(yr.begin(), yr.end(), ys.begin() + static_cast<std::ptrdiff_t>(r * t));
      }
      Tape tape;
      std::vector<Var> handles;
      handles.reserve(params.size());
      for (const Parameter& p : params) handles.push_back(tape.parameter(p.value));
      Var x = tape.constant(Tensor({rows, f}, std::move(xs)));
      Var y = tape.constant(Tensor({rows, t}, std::move(ys)));
      Var pred = model.forward(tape, x, handles);
      if (!all_finite(tape.value(pred))) {
        throw NumericError("model '" + cfg.name + "': predictions became non-finite at epoch " + std::to_string(epoch) +
                           ", batch " + std::to_string(batches + 1));
      }
      Var loss = cfg.head == Head::sigmoid ? binary_cross_entropy(tape, pred, y) : cross_entropy(tape, pred, y);
      const double lv = tape.value(loss).item();
      if (!std::isfinite(lv)) {
        throw NumericError("model '" + cfg.name + "': loss became non-finite at epoch " + std::to_string(epoch) +
                           ", batch " + std::to_string(batches + 1));
      }
      const Tensor& pv = tape.value(pred);
      for (std::size_t r = 0; r < rows; ++r) {
        const auto pr = pv.row(r);
        const std::size_t guess =
            t == 1 ? (pr[0] >= 0.5 ? 1 : 0) : static_cast<std::size_t>(std::max_element(pr.begin(), pr.end()) - pr.begin());
        if (static_cast<int>(guess) == data.classes[order[b0 + r]]) ++hits;
      }
      const Gradients g = tape.backward(loss);
      for (std::size_t i = 0; i < params.size(); ++i) grads[i] = g[handles[i]];
      try {
        optimizer.step(params, grads);
      } catch (const NumericError& e) {
        throw NumericError("model '" + cfg.name + "' at epoch " + std::to_string(epoch) + ", batch " +
                           std::to_string(batches + 1) + ": " + e.what());
      }
      for (const Parameter& p : params) {
        if (!all_finite(p.value)) {
          throw NumericError("model '" + cfg.name + "': parameter " + p.name + " became non-finite at epoch " +
                             std::to_string(epoch) + ", batch " + std::to_string(batches + 1));
        }
      }
      loss_sum += lv;
      ++batches;
    }
    EpochStats stats;
    stats.epoch = epoch;
    stats.loss = loss_sum / static_cast<double>(batches);
    stats.running_accuracy = static_cast<double>(hits) / static_cast<double>(n);
    stats.accuracy = std::numeric_limits<double>::quiet_NaN();
    if (options.evaluate_each_epoch || epoch == cfg.epochs) {
      stats.accuracy = accuracy_of(model.predict_proba(data.x), data.classes);
    }
    stats.seconds = std::chrono::duration<double>(clock::now() - start).count();
    report.epochs.push_back(stats);
    if (options.on_epoch) options.on_epoch(stats);
  }
  report.seconds = std::chrono::duration<double>(clock::now() - start).count();
  if (!report.epochs.empty()) {
    report.final_train_accuracy = report.epochs.back().accuracy;
  } else if (n > 0) {
    report.final_train_accuracy = accuracy_of(model.predict_proba(data.x), data.classes);
  }
  report.checksum = model.checksum();
  return report;
}

}  // namespace botstack
