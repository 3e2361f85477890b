#include "botstack/model.hpp"

#include <algorithm>

#include "botstack/checksum.hpp"
#include "botstack/error.hpp"
#include "botstack/init.hpp"
#include "botstack/layers.hpp"
#include "botstack/ops.hpp"
#include "botstack/rng.hpp"

namespace botstack {
namespace {

bool probabilistic(Activation a) { return a == Activation::sigmoid || a == Activation::softmax; }

Activation second_or_first(const std::vector<Activation>& acts) {
  return acts.size() > 1 && !probabilistic(acts[1]) ? acts[1] : acts[0];
}

Activation head_activation(Head h) { return h == Head::sigmoid ? Activation::sigmoid : Activation::softmax; }

std::size_t product(const Shape& s) { return shape_size(s); }

CellKind cell_of(ModelKind kind) {
  switch (kind) {
    case ModelKind::lstm:
    case ModelKind::bilstm: return CellKind::lstm;
    case ModelKind::gru:
    case ModelKind::bigru: return CellKind::gru;
    default: return CellKind::rnn;
  }
}

constexpr std::size_t kPredictChunk = 512;

}  // namespace

Model::Model(ModelConfig config, std::size_t input_width) : config_(std::move(config)), input_width_(input_width) {
  plan();
  Rng rng(derive_seed(config_.seed, {0x1417u}));
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    const Block& blk = blocks_[b];
    switch (blk.type) {
      case BlockType::dense: {
        Parameter& w = params_[blk.first_param];
        w.value = glorot_uniform(rng, w.value.shape(), w.value.shape()[0], w.value.shape()[1]);
        break;
      }
      case BlockType::conv: {
        Parameter& k = params_[blk.first_param];
        const Shape& s = k.value.shape();
        k.value = glorot_uniform(rng, s, s[1] * s[2], s[0] * s[2]);
        break;
      }
      case BlockType::pool: break;
      case BlockType::recurrent:
      case BlockType::bidirectional: {
        const std::size_t dirs = blk.type == BlockType::bidirectional ? 2 : 1;
        for (std::size_t d = 0; d < dirs; ++d) {
          Parameter& wx = params_[blk.first_param + 3 * d];
          Parameter& wh = params_[blk.first_param + 3 * d + 1];
          const Shape& sx = wx.value.shape();
          wx.value = glorot_uniform(rng, sx, sx[0], sx[1]);
          wh.value = orthogonal_blocks(rng, wh.value.shape()[0], gate_count(blk.cell));
        }
        break;
      }
    }
  }
}

Model::Model(ModelConfig config, std::size_t input_width, std::vector<Tensor> values)
    : config_(std::move(config)), input_width_(input_width) {
  plan();
  if (values.size() != params_.size()) {
    throw IntegrityError("model expects " + std::to_string(params_.size()) + " parameter tensors, got " +
                         std::to_string(values.size()));
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i].shape() != params_[i].value.shape()) {
      throw IntegrityError("parameter " + params_[i].name + " has shape " + to_string(values[i].shape()) +
                           ", expected " + to_string(params_[i].value.shape()));
    }
    params_[i].value = std::move(values[i]);
  }
}

void Model::add_params(const std::string& prefix, const std::vector<std::string>& names,
                       const std::vector<Shape>& shapes) {
  LayerSummary& s = summary_.back();
  for (std::size_t i = 0; i < shapes.size(); ++i) {
    params_.push_back(Parameter{prefix + "." + names[i], Tensor(shapes[i])});
    s.params.push_back(shapes[i]);
    s.param_count += product(shapes[i]);
  }
}

void Model::plan() {
  config_.validate();
  if (config_.kind == ModelKind::stacked) throw ConfigError("a stacked config is built with train_stacked");
  if (input_width_ == 0) throw ConfigError("model input width must be positive");

  const std::vector<Activation>& acts = config_.activations;
  const std::vector<std::size_t>& units = config_.units;
  std::size_t width = input_width_;  // flat per-sample width entering the next block
  std::size_t steps = input_width_, channels = 1;
  std::size_t dense_index = 0;

  auto dense = [&](std::size_t out, Activation act) {
    Block b;
    b.type = BlockType::dense;
    b.first_param = params_.size();
    b.act = act;
    blocks_.push_back(b);
    const std::string name = "dense" + std::to_string(dense_index++);
    summary_.push_back(LayerSummary{name, "dense", {out}, {}, 0, std::string(activation_name(act))});
    add_params(name, {"weight", "bias"}, dense_param_shapes(width, out));
    width = out;
  };

  switch (config_.kind) {
    case ModelKind::ann: {
      for (std::size_t i = 0; i + 1 < units.size(); ++i) {
        dense(units[i], i + 2 == units.size() ? second_or_first(acts) : acts[0]);
      }
      break;
    }
    case ModelKind::cnn: {
      for (std::size_t c = 0; c < config_.conv_channels.size(); ++c) {
        const std::size_t k = config_.kernel, pad = config_.kernel / 2, out_ch = config_.conv_channels[c];
        if (k > steps + 2 * pad) {
          throw ConfigError("cnn: kernel " + std::to_string(k) + " exceeds padded length " + std::to_string(steps + 2 * pad));
        }
        Block conv;
        conv.type = BlockType::conv;
        conv.first_param = params_.size();
        conv.act = acts[0];
        conv.steps = steps;
        conv.channels = channels;
        conv.kernel = k;
        conv.padding = pad;
        blocks_.push_back(conv);
        const std::size_t t_conv = conv1d_output_steps(steps, k, 1, pad);
        const std::string name = "conv" + std::to_string(c);
        summary_.push_back(LayerSummary{name, "conv1d", {t_conv, out_ch}, {}, 0, std::string(activation_name(acts[0]))});
        add_params(name, {"kernels", "bias"}, conv1d_param_shapes(channels, out_ch, k));
        steps = t_conv;
        channels = out_ch;

        if (steps < config_.pool) {
          throw ConfigError("cnn: sequence of " + std::to_string(steps) + " steps is shorter than pool size " +
                            std::to_string(config_.pool));
        }
        Block pool;
        pool.type = BlockType::pool;
        pool.steps = steps;
        pool.channels = channels;
        pool.kernel = config_.pool;
        blocks_.push_back(pool);
        steps = (steps - config_.pool) / config_.pool + 1;
        summary_.push_back(LayerSummary{"pool" + std::to_string(c), "maxpool1d", {steps, channels}, {}, 0, ""});
      }
      width = steps * channels;
      for (std::size_t i = 0; i + 1 < units.size(); ++i) dense(units[i], second_or_first(acts));
      break;
    }
    case ModelKind::rnn:
    case ModelKind::lstm:
    case ModelKind::gru:
    case ModelKind::bilstm:
    case ModelKind::bigru: {
      const bool bi = config_.kind == ModelKind::bilstm || config_.kind == ModelKind::bigru;
      const CellKind cell = cell_of(config_.kind);
      const std::size_t layers = units.size() - 1;
      for (std::size_t l = 0; l < layers; ++l) {
        const std::size_t h = units[l];
        Block b;
        b.type = bi ? BlockType::bidirectional : BlockType::recurrent;
        b.first_param = params_.size();
        b.act = acts[0];
        b.steps = steps;
        b.channels = channels;
        b.cell = cell;
        b.final_state = l + 1 == layers;
        blocks_.push_back(b);
        const std::size_t out_ch = bi ? 2 * h : h;
        const std::string name = std::string(bi ? "bi" : "") + std::string(cell_name(cell)) + std::to_string(l);
        summary_.push_back(LayerSummary{name, bi ? "bidirectional-" + std::string(cell_name(cell)) : std::string(cell_name(cell)),
                                        b.final_state ? Shape{out_ch} : Shape{steps, out_ch}, {}, 0,
                                        std::string(activation_name(acts[0]))});
        const auto shapes = recurrent_param_shapes(cell, channels, h);
        if (bi) {
          add_params(name + ".fwd", {"input_weights", "recurrent_weights", "bias"}, shapes);
          add_params(name + ".bwd", {"input_weights", "recurrent_weights", "bias"}, shapes);
        } else {
          add_params(name, {"input_weights", "recurrent_weights", "bias"}, shapes);
        }
        channels = out_ch;
        width = b.final_state ? out_ch : steps * out_ch;
      }
      break;
    }
    case ModelKind::stacked: break;
  }
  dense(units.back(), head_activation(config_.head));
  summary_.back().kind = "head";
}

std::size_t Model::parameter_count() const {
  std::size_t n = 0;
  for (const Parameter& p : params_) n += p.value.size();
  return n;
}

std::uint64_t Model::checksum() const {
  std::uint64_t h = kFnvOffset;
  for (const Parameter& p : params_) {
    h = fnv1a64(std::string_view(p.name), h);
    h = fnv1a64(p.value.data(), h);
  }
  return h;
}

nlohmann::json Model::summary_json() const {
  nlohmann::json layers = nlohmann::json::array();
  for (const LayerSummary& s : summary_) {
    nlohmann::json shapes = nlohmann::json::array();
    for (const Shape& p : s.params) shapes.push_back(p);
    layers.push_back({{"name", s.name},
                      {"kind", s.kind},
                      {"output", s.output},
                      {"params", shapes},
                      {"param_count", s.param_count},
                      {"activation", s.activation}});
  }
  return {{"model", config_.name},
          {"kind", model_kind_name(config_.kind)},
          {"input_width", input_width_},
          {"layers", layers},
          {"total_params", parameter_count()}};
}

Var Model::forward(Tape& tape, Var x, std::span<const Var> params) const {
  if (params.size() != params_.size()) throw UsageError("forward needs one handle per parameter");
  const Tensor& xv = tape.value(x);
  if (xv.rank() != 2 || xv.cols() != input_width_) {
    throw DimensionError("model '" + config_.name + "' expects [batch x " + std::to_string(input_width_) + "], got " +
                         to_string(xv.shape()));
  }
  Var h = x;
  for (const Block& b : blocks_) {
    const Var* p = params.data() + b.first_param;
    switch (b.type) {
      case BlockType::dense:
        h = dense_forward(tape, h, DenseParams{p[0], p[1]}, b.act);
        break;
      case BlockType::conv:
        h = conv1d_forward(tape, h, SequenceShape{b.steps, b.channels}, Conv1dParams{p[0], p[1]}, 1, b.padding);
        h = activation(tape, *b.act, h);
        break;
      case BlockType::pool:
        h = maxpool1d(tape, h, b.steps, b.channels, b.kernel, b.kernel);
        break;
      case BlockType::recurrent: {
        RecurrentOptions opts;
        opts.activation = *b.act;
        const RecurrentOutput out =
            recurrent_forward(tape, b.cell, h, SequenceShape{b.steps, b.channels}, RecurrentParams{p[0], p[1], p[2]}, opts);
        h = b.final_state ? out.last_h : out.sequence;
        break;
      }
      case BlockType::bidirectional:
        h = bidirectional(tape, b.cell, h, SequenceShape{b.steps, b.channels}, RecurrentParams{p[0], p[1], p[2]},
                          RecurrentParams{p[3], p[4], p[5]},
                          b.final_state ? BidirectionalMode::final_state : BidirectionalMode::per_step, *b.act);
        break;
    }
  }
  return h;
}

Tensor Model::predict_proba(const Tensor& x) const {
  if (x.rank() != 2 || x.cols() != input_width_) {
    throw DimensionError("model '" + config_.name + "' expects [N x " + std::to_string(input_width_) + "], got " +
                         to_string(x.shape()));
  }
  const std::size_t n = x.rows(), out_w = output_width();
  std::vector<double> out;
  out.reserve(n * out_w);
  for (std::size_t start = 0; start < n; start += kPredictChunk) {
    const std::size_t rows = std::min(kPredictChunk, n - start);
    Tape tape;
    std::vector<Var> handles;
    handles.reserve(params_.size());
    for (const Parameter& p : params_) handles.push_back(tape.constant(p.value));
    const auto first = x.data().begin() + static_cast<std::ptrdiff_t>(start * input_width_);
    Var xv = tape.constant(Tensor({rows, input_width_}, std::vector<double>(first, first + static_cast<std::ptrdiff_t>(rows * input_width_))));
    const Tensor& y = tape.value(forward(tape, xv, handles));
    out.insert(out.end(), y.data().begin(), y.data().end());
  }
  return Tensor({n, out_w}, std::move(out));
}

std::vector<int> predict_classes(const Tensor& probabilities) {
  const std::size_t n = probabilities.rows(), c = probabilities.cols();
  std::vector<int> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = probabilities.row(i);
    if (c == 1) {
      out[i] = row[0] >= 0.5 ? 1 : 0;
    } else {
      out[i] = static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
    }
  }
  return out;
}

double accuracy_of(const Tensor& probabilities, std::span<const int> classes) {
  if (probabilities.rows() != classes.size()) throw DimensionError("prediction and label counts differ");
  if (classes.empty()) throw UndefinedMetricError("accuracy of an empty set is undefined");
  const std::vector<int> pred = predict_classes(probabilities);
  std::size_t hit = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) hit += pred[i] == classes[i];
  return static_cast<double>(hit) / static_cast<double>(pred.size());
}

}  // namespace botstack
