#pragma once

// Per-sample forward pass of a built model written with plain loops over the
// parameter tensors. It only relies on the parameter order and the layer
// plan documented on Model, never on the tape.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "botstack/model.hpp"

namespace oracle {

using Vec = std::vector<double>;

inline double apply(botstack::Activation a, double v) {
  switch (a) {
    case botstack::Activation::relu: return v > 0.0 ? v : 0.0;
    case botstack::Activation::tanh: return std::tanh(v);
    case botstack::Activation::sigmoid: return 1.0 / (1.0 + std::exp(-v));
    case botstack::Activation::softmax: break;
  }
  return v;
}

inline Vec activate(botstack::Activation a, Vec v) {
  if (a == botstack::Activation::softmax) {
    const double m = *std::max_element(v.begin(), v.end());
    double s = 0.0;
    for (double& x : v) s += (x = std::exp(x - m));
    for (double& x : v) x /= s;
    return v;
  }
  for (double& x : v) x = apply(a, x);
  return v;
}

inline Vec affine(const Vec& x, const botstack::Tensor& w, const botstack::Tensor& b) {
  Vec y(w.cols());
  for (std::size_t j = 0; j < y.size(); ++j) {
    double s = b[j];
    for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * w.at(i, j);
    y[j] = s;
  }
  return y;
}

// seq is step-major [T * C]; kernels [co x ci x k]; same padding k / 2.
inline Vec conv_same(const Vec& seq, std::size_t steps, std::size_t ch, const botstack::Tensor& k,
                     const botstack::Tensor& b, std::size_t& out_steps) {
  const std::size_t co = k.shape()[0], width = k.shape()[2], pad = width / 2;
  out_steps = steps + 2 * pad - width + 1;
  Vec y(out_steps * co);
  for (std::size_t t = 0; t < out_steps; ++t)
    for (std::size_t o = 0; o < co; ++o) {
      double s = b[o];
      for (std::size_t c = 0; c < ch; ++c)
        for (std::size_t j = 0; j < width; ++j) {
          const long src = static_cast<long>(t + j) - static_cast<long>(pad);
          if (src < 0 || src >= static_cast<long>(steps)) continue;
          s += k[(o * ch + c) * width + j] * seq[static_cast<std::size_t>(src) * ch + c];
        }
      y[t * co + o] = s;
    }
  return y;
}

inline Vec max_pool(const Vec& seq, std::size_t steps, std::size_t ch, std::size_t p, std::size_t& out_steps) {
  out_steps = (steps - p) / p + 1;
  Vec y(out_steps * ch);
  for (std::size_t t = 0; t < out_steps; ++t)
    for (std::size_t c = 0; c < ch; ++c) {
      double m = seq[t * p * ch + c];
      for (std::size_t q = 1; q < p; ++q) m = std::max(m, seq[(t * p + q) * ch + c]);
      y[t * ch + c] = m;
    }
  return y;
}

struct Walk {
  Vec sequence;  // step order, [T * h]
  Vec last;
};

inline Walk run_cell(botstack::CellKind kind, const Vec& seq, std::size_t steps, std::size_t ch,
                     const botstack::Tensor& wx, const botstack::Tensor& wh, const botstack::Tensor& b,
                     botstack::Activation act, bool reverse) {
  using botstack::CellKind;
  const std::size_t h = wh.shape()[0], g = wx.cols() / h;
  Vec state(h, 0.0), cell(h, 0.0);
  Walk w;
  w.sequence.assign(steps * h, 0.0);
  for (std::size_t n = 0; n < steps; ++n) {
    const std::size_t t = reverse ? steps - 1 - n : n;
    Vec z(g * h);
    for (std::size_t j = 0; j < g * h; ++j) {
      double s = b[j];
      for (std::size_t c = 0; c < ch; ++c) s += seq[t * ch + c] * wx.at(c, j);
      if (!(kind == CellKind::gru && j >= 2 * h))
        for (std::size_t i = 0; i < h; ++i) s += state[i] * wh.at(i, j);
      z[j] = s;
    }
    auto sig = [](double v) { return 1.0 / (1.0 + std::exp(-v)); };
    Vec next(h);
    if (kind == CellKind::rnn) {
      next = activate(act, Vec(z.begin(), z.begin() + static_cast<std::ptrdiff_t>(h)));
    } else if (kind == CellKind::lstm) {
      const Vec cand = activate(act, Vec(z.begin() + static_cast<std::ptrdiff_t>(2 * h),
                                         z.begin() + static_cast<std::ptrdiff_t>(3 * h)));
      for (std::size_t i = 0; i < h; ++i) cell[i] = sig(z[h + i]) * cell[i] + sig(z[i]) * cand[i];
      const Vec squashed = activate(act, cell);
      for (std::size_t i = 0; i < h; ++i) next[i] = sig(z[3 * h + i]) * squashed[i];
    } else {
      Vec pre(h);
      for (std::size_t j = 0; j < h; ++j) {
        double s = z[2 * h + j];
        for (std::size_t i = 0; i < h; ++i) s += sig(z[h + i]) * state[i] * wh.at(i, 2 * h + j);
        pre[j] = s;
      }
      const Vec cand = activate(act, pre);
      for (std::size_t i = 0; i < h; ++i) {
        const double u = sig(z[i]);
        next[i] = (1.0 - u) * state[i] + u * cand[i];
      }
    }
    state = next;
    std::copy(state.begin(), state.end(), w.sequence.begin() + static_cast<std::ptrdiff_t>(t * h));
  }
  w.last = state;
  return w;
}

inline botstack::CellKind cell_for(botstack::ModelKind k) {
  using botstack::ModelKind;
  if (k == ModelKind::lstm || k == ModelKind::bilstm) return botstack::CellKind::lstm;
  if (k == ModelKind::gru || k == ModelKind::bigru) return botstack::CellKind::gru;
  return botstack::CellKind::rnn;
}

inline Vec model_forward(const botstack::Model& m, const Vec& x) {
  using botstack::Activation;
  using botstack::ModelKind;
  const botstack::ModelConfig& cfg = m.config();
  const auto& p = m.parameters();
  const auto& acts = cfg.activations;
  // A sigmoid or softmax second name only describes the head.
  const bool hidden_second = acts.size() > 1 && (acts[1] == Activation::relu || acts[1] == Activation::tanh);
  const Activation second = hidden_second ? acts[1] : acts[0];
  const Activation head = cfg.head == botstack::Head::sigmoid ? Activation::sigmoid : Activation::softmax;
  std::size_t k = 0;
  Vec h = x;
  std::size_t steps = x.size(), ch = 1;
  switch (cfg.kind) {
    case ModelKind::ann:
      for (std::size_t i = 0; i + 1 < cfg.units.size(); ++i, k += 2)
        h = activate(i + 2 == cfg.units.size() ? second : acts[0], affine(h, p[k].value, p[k + 1].value));
      break;
    case ModelKind::cnn:
      for (std::size_t c = 0; c < cfg.conv_channels.size(); ++c, k += 2) {
        std::size_t t = 0;
        h = activate(acts[0], conv_same(h, steps, ch, p[k].value, p[k + 1].value, t));
        ch = cfg.conv_channels[c];
        h = max_pool(h, t, ch, cfg.pool, steps);
      }
      for (std::size_t i = 0; i + 1 < cfg.units.size(); ++i, k += 2) h = activate(second, affine(h, p[k].value, p[k + 1].value));
      break;
    default: {
      const bool bi = cfg.kind == ModelKind::bilstm || cfg.kind == ModelKind::bigru;
      const botstack::CellKind cell = cell_for(cfg.kind);
      const std::size_t layers = cfg.units.size() - 1;
      for (std::size_t l = 0; l < layers; ++l) {
        const bool last = l + 1 == layers;
        const std::size_t hid = cfg.units[l];
        const Walk f = run_cell(cell, h, steps, ch, p[k].value, p[k + 1].value, p[k + 2].value, acts[0], false);
        k += 3;
        if (!bi) {
          h = last ? f.last : f.sequence;
          ch = hid;
          continue;
        }
        const Walk r = run_cell(cell, h, steps, ch, p[k].value, p[k + 1].value, p[k + 2].value, acts[0], true);
        k += 3;
        if (last) {
          h = f.last;
          h.insert(h.end(), r.last.begin(), r.last.end());
        } else {
          h.assign(steps * 2 * hid, 0.0);
          for (std::size_t t = 0; t < steps; ++t)
            for (std::size_t i = 0; i < hid; ++i) {
              h[t * 2 * hid + i] = f.sequence[t * hid + i];
              h[t * 2 * hid + hid + i] = r.sequence[t * hid + i];
            }
        }
        ch = 2 * hid;
      }
    }
  }
  return activate(head, affine(h, p[k].value, p[k + 1].value));
}

}  // namespace oracle
