#include "botstack/layers.hpp"

#include <algorithm>
#include <cmath>
#include <memory>


#include "botstack/error.hpp"

namespace botstack {

Activation parse_activation(std::string_view name) {
  if (name == "relu") return Activation::relu;
  if (name == "tanh") return Activation::tanh;
  if (name == "sigmoid") return Activation::sigmoid;
  if (name == "softmax") return Activation::softmax;
  throw ConfigError("unknown activation '" + std::string(name) + "' (expected relu, tanh, sigmoid or softmax)");
}

std::string_view activation_name(Activation a) {
  switch (a) {
    case Activation::relu: return "relu";
    case Activation::tanh: return "tanh";
    case Activation::sigmoid: return "sigmoid";
    case Activation::softmax: return "softmax";
  }
  return "?";
}

Var activation(Tape& tape, Activation kind, Var x) {
  switch (kind) {
    case Activation::relu: return relu(tape, x);
    case Activation::tanh: return tanh(tape, x);
    case Activation::sigmoid: return sigmoid(tape, x);
    case Activation::softmax: return softmax(tape, x);
  }
  throw ConfigError("unknown activation kind");
}

SequenceView::SequenceView(Tensor steps_by_features) : data_(std::move(steps_by_features)) {
  if (data_.rank() != 2 || data_.shape()[0] == 0 || data_.shape()[1] == 0) {
    throw DimensionError("sequence must be [T x F] with T, F >= 1, got " + to_string(data_.shape()));
  }
}

Tensor SequenceView::as_batch_row() const { return data_.reshaped({1, data_.size()}); }

SequenceView SequenceView::from_record(std::span<const double> features) {
  return SequenceView(Tensor({features.size(), 1}, std::vector<double>(features.begin(), features.end())));
}

std::string_view cell_name(CellKind kind) {
  switch (kind) {
    case CellKind::rnn: return "rnn";
    case CellKind::lstm: return "lstm";
    case CellKind::gru: return "gru";
  }
  return "?";
}

std::size_t gate_count(CellKind kind) {
  switch (kind) {
    case CellKind::rnn: return 1;
    case CellKind::lstm: return 4;
    case CellKind::gru: return 3;
  }
  return 1;
}

std::vector<Shape> dense_param_shapes(std::size_t in, std::size_t out) { return {{in, out}, {out}}; }

std::vector<Shape> conv1d_param_shapes(std::size_t in_channels, std::size_t out_channels, std::size_t kernel) {
  return {{out_channels, in_channels, kernel}, {out_channels}};
}

std::vector<Shape> recurrent_param_shapes(CellKind kind, std::size_t in, std::size_t hidden) {
  const std::size_t g = gate_count(kind) * hidden;
  return {{in, g}, {hidden, g}, {g}};
}

Var dense_forward(Tape& tape, Var x, const DenseParams& p, std::optional<Activation> act) {
  const Tensor& w = tape.value(p.weight);
  const Tensor& b = tape.value(p.bias);
  if (w.rank() != 2 || b.size() != w.shape()[1]) {
    throw DimensionError("dense parameters W " + to_string(w.shape()) + " and b " + to_string(b.shape()) + " disagree");
  }
  Var z = add(tape, matmul(tape, x, p.weight), p.bias);
  return act ? activation(tape, *act, z) : z;
}

Var conv1d_forward(Tape& tape, Var x, SequenceShape shape, const Conv1dParams& p, std::size_t stride,
                   std::size_t padding) {
  return conv1d(tape, x, p.kernels, p.bias, Conv1dGeometry{shape.steps, shape.channels, stride, padding});
}

namespace {

struct CellGeometry {
  std::size_t batch;
  std::size_t hidden;
};

CellGeometry check_recurrent(const Tape& tape, CellKind kind, Var x, SequenceShape shape, const RecurrentParams& p) {
  const Tensor& xv = tape.value(x);
  const Tensor& wx = tape.value(p.input_weights);
  const Tensor& wh = tape.value(p.recurrent_weights);
  const Tensor& b = tape.value(p.bias);
  if (shape.steps == 0 || shape.channels == 0) throw DimensionError("sequence needs T >= 1 and C >= 1");
  if (xv.rank() != 2 || xv.cols() != shape.steps * shape.channels) {
    throw DimensionError(std::string(cell_name(kind)) + ": input " + to_string(xv.shape()) + " is not [batch x " +
                         std::to_string(shape.steps) + "*" + std::to_string(shape.channels) + "]");
  }
  if (wh.rank() != 2) throw DimensionError("recurrent weights must be rank 2, got " + to_string(wh.shape()));
  const std::size_t h = wh.shape()[0];
  const std::size_t g = gate_count(kind) * h;
  if (wh.shape()[1] != g || wx.rank() != 2 || wx.shape()[0] != shape.channels || wx.shape()[1] != g || b.size() != g) {
    throw DimensionError(std::string(cell_name(kind)) + ": parameters Wx " + to_string(wx.shape()) + ", Wh " +
                         to_string(wh.shape()) + ", b " + to_string(b.shape()) + " do not fit " +
                         std::to_string(shape.channels) + " channels");
  }
  return {xv.rows(), h};
}

std::size_t step_at(std::size_t i, std::size_t steps, bool reverse) { return reverse ? steps - 1 - i : i; }

// In place on `rows` rows of `cols` values spaced `ld` apart.
void apply_activation(Activation a, double* v, std::size_t rows, std::size_t cols, std::size_t ld) {
  for (std::size_t r = 0; r < rows; ++r) {
    double* row = v + r * ld;
    switch (a) {
      case Activation::relu:
        for (std::size_t j = 0; j < cols; ++j) row[j] = row[j] > 0.0 ? row[j] : 0.0;
        break;
      case Activation::tanh:
        for (std::size_t j = 0; j < cols; ++j) row[j] = std::tanh(row[j]);
        break;
      case Activation::sigmoid:
        kernels::logistic(row, row, cols);
        break;
      case Activation::softmax: {
        double peak = row[0];
        for (std::size_t j = 1; j < cols; ++j) peak = std::max(peak, row[j]);
        double total = 0.0;
        for (std::size_t j = 0; j < cols; ++j) total += (row[j] = std::exp(row[j] - peak));
        for (std::size_t j = 0; j < cols; ++j) row[j] /= total;
        break;
      }
    }
  }
}

// g <- dL/dz given g = dL/dy and the activation outputs y.
void activation_backward(Activation a, const double* y, std::size_t ldy, double* g, std::size_t ldg, std::size_t rows,
                         std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double* yr = y + r * ldy;
    double* gr = g + r * ldg;
    switch (a) {
      case Activation::relu:
        for (std::size_t j = 0; j < cols; ++j) gr[j] = yr[j] > 0.0 ? gr[j] : 0.0;
        break;
      case Activation::tanh:
        for (std::size_t j = 0; j < cols; ++j) gr[j] *= 1.0 - yr[j] * yr[j];
        break;
      case Activation::sigmoid:
        for (std::size_t j = 0; j < cols; ++j) gr[j] *= yr[j] * (1.0 - yr[j]);
        break;
      case Activation::softmax: {
        double dot = 0.0;
        for (std::size_t j = 0; j < cols; ++j) dot += gr[j] * yr[j];
        for (std::size_t j = 0; j < cols; ++j) gr[j] = yr[j] * (gr[j] - dot);
        break;
      }
    }
  }
}

void sigmoid_backward(const double* y, std::size_t ldy, double* g, std::size_t ldg, std::size_t rows,
                      std::size_t cols) {
  activation_backward(Activation::sigmoid, y, ldy, g, ldg, rows, cols);
}

struct Geometry {
  CellKind kind;
  std::size_t batch, steps, channels, hidden, width;  // width = gates * hidden
  bool reverse;
  Activation act;
  std::size_t out_cols() const { return steps * hidden + (kind == CellKind::lstm ? hidden : 0); }
  std::size_t step(std::size_t i) const { return step_at(i, steps, reverse); }
};

// Per-call buffers kept for the backward sweep. Rows are [batch][step].
struct Workspace {
  std::vector<double> gates;      // activated gate blocks, [B*T x width]
  std::vector<double> cells;      // lstm c_t, [B*T x h]
  std::vector<double> cell_act;   // lstm act(c_t)
  std::vector<double> reset_h;    // gru r_t * h_{t-1}
  std::vector<double> h0, c0;     // [B x h] expanded initial states, empty when absent
  std::vector<double> dz;         // backward scratch, same layout as gates
};

// Workspaces are recycled so their capacity survives from batch to batch.
std::shared_ptr<Workspace> acquire_workspace() {
  thread_local std::vector<std::unique_ptr<Workspace>> pool;
  Workspace* ws = nullptr;
  if (pool.empty()) {
    ws = new Workspace;
  } else {
    ws = pool.back().release();
    pool.pop_back();
  }
  return std::shared_ptr<Workspace>(ws, [p = &pool](Workspace* w) {
    if (p->size() < 16) {
      w->h0.clear();
      w->c0.clear();
      p->emplace_back(w);
    } else {
      delete w;
    }
  });
}

std::vector<double> expand_state(const Tensor& s, std::size_t batch, std::size_t hidden) {
  std::vector<double> out(batch * hidden);
  const bool row = s.size() == hidden;
  for (std::size_t b = 0; b < batch; ++b)
    for (std::size_t j = 0; j < hidden; ++j) out[b * hidden + j] = s[row ? j : b * hidden + j];
  return out;
}

void check_state(const Tape& tape, const std::optional<Var>& s, std::size_t batch, std::size_t hidden, const char* what) {
  if (!s) return;
  const Tensor& v = tape.value(*s);
  const bool ok = (v.rank() == 1 && v.size() == hidden) ||
                  (v.rank() == 2 && v.shape()[1] == hidden && (v.shape()[0] == batch || v.shape()[0] == 1));
  if (!ok) {
    throw DimensionError(std::string(what) + " has shape " + to_string(v.shape()) + ", expected [" +
                         std::to_string(hidden) + "]");
  }
}

void forward_sweep(const Geometry& g, const Tensor& x, const Tensor& wx, const Tensor& wh, const Tensor& bias,
                   Workspace& ws, Tensor& out) {
  const std::size_t B = g.batch, T = g.steps, h = g.hidden, W = g.width, ldo = g.out_cols();
  const std::size_t ldz = T * W, ldc = T * h;
  ws.gates.assign(B * T * W, 0.0);
  double* z = ws.gates.data();
  kernels::gemm(false, false, B * T, W, g.channels, 1.0, x.data().data(), g.channels, wx.data().data(), W, 0.0, z, W);
  for (std::size_t r = 0; r < B * T; ++r)
    for (std::size_t j = 0; j < W; ++j) z[r * W + j] += bias[j];
  if (g.kind == CellKind::lstm) {
    ws.cells.assign(B * T * h, 0.0);
    ws.cell_act.assign(B * T * h, 0.0);
  }
  if (g.kind == CellKind::gru) ws.reset_h.assign(B * T * h, 0.0);

  double* o = out.data().data();
  for (std::size_t i = 0; i < T; ++i) {
    const std::size_t t = g.step(i);
    double* zt = z + t * W;
    const double* h_prev = nullptr;
    std::size_t ld_prev = 0;
    if (i > 0) {
      h_prev = o + g.step(i - 1) * h;
      ld_prev = ldo;
    } else if (!ws.h0.empty()) {
      h_prev = ws.h0.data();
      ld_prev = h;
    }
    const std::size_t gated = g.kind == CellKind::gru ? 2 * h : W;
    if (h_prev) kernels::gemm(false, false, B, gated, h, 1.0, h_prev, ld_prev, wh.data().data(), W, 1.0, zt, ldz);
    double* ht = o + t * h;

    switch (g.kind) {
      case CellKind::rnn:
        apply_activation(g.act, zt, B, h, ldz);
        for (std::size_t b = 0; b < B; ++b) std::copy_n(zt + b * ldz, h, ht + b * ldo);
        break;
      case CellKind::lstm: {
        apply_activation(Activation::sigmoid, zt, B, 2 * h, ldz);
        apply_activation(g.act, zt + 2 * h, B, h, ldz);
        apply_activation(Activation::sigmoid, zt + 3 * h, B, h, ldz);
        double* ct = ws.cells.data() + t * h;
        double* at = ws.cell_act.data() + t * h;
        const double* c_prev = i > 0 ? ws.cells.data() + g.step(i - 1) * h : (ws.c0.empty() ? nullptr : ws.c0.data());
        const std::size_t ld_cprev = i > 0 ? ldc : h;
        for (std::size_t b = 0; b < B; ++b) {
          const double* gate = zt + b * ldz;
          for (std::size_t j = 0; j < h; ++j) {
            const double written = gate[j] * gate[2 * h + j];
            ct[b * ldc + j] = c_prev ? gate[h + j] * c_prev[b * ld_cprev + j] + written : written;
            at[b * ldc + j] = ct[b * ldc + j];
          }
        }
        apply_activation(g.act, at, B, h, ldc);
        for (std::size_t b = 0; b < B; ++b)
          for (std::size_t j = 0; j < h; ++j) ht[b * ldo + j] = zt[b * ldz + 3 * h + j] * at[b * ldc + j];
        break;
      }
      case CellKind::gru: {
        apply_activation(Activation::sigmoid, zt, B, 2 * h, ldz);
        double* rh = ws.reset_h.data() + t * h;
        if (h_prev) {
          for (std::size_t b = 0; b < B; ++b)
            for (std::size_t j = 0; j < h; ++j) rh[b * ldc + j] = zt[b * ldz + h + j] * h_prev[b * ld_prev + j];
          kernels::gemm(false, false, B, h, h, 1.0, rh, ldc, wh.data().data() + 2 * h, W, 1.0, zt + 2 * h, ldz);
        }
        apply_activation(g.act, zt + 2 * h, B, h, ldz);
        for (std::size_t b = 0; b < B; ++b)
          for (std::size_t j = 0; j < h; ++j) {
            const double u = zt[b * ldz + j];
            const double fresh = u * zt[b * ldz + 2 * h + j];
            ht[b * ldo + j] = h_prev ? (1.0 - u) * h_prev[b * ld_prev + j] + fresh : fresh;
          }
        break;
      }
    }
  }
  if (g.kind == CellKind::lstm) {
    const double* c_last = ws.cells.data() + g.step(T - 1) * h;
    for (std::size_t b = 0; b < B; ++b) std::copy_n(c_last + b * ldc, h, o + b * ldo + T * h);
  }
}

void add_state_grad(const std::vector<double>& grad, std::size_t batch, std::size_t hidden, Tensor& target) {
  const bool row = target.size() == hidden;
  for (std::size_t b = 0; b < batch; ++b)
    for (std::size_t j = 0; j < hidden; ++j) target[row ? j : b * hidden + j] += grad[b * hidden + j];
}

struct SweepGrads {
  Tensor* x;
  Tensor* wx;
  Tensor* wh;
  Tensor* bias;
  Tensor* h0;
  Tensor* c0;
};

void backward_sweep(const Geometry& g, const Tensor& x, const Tensor& wx, const Tensor& wh, Workspace& ws,
                    const Tensor& out, const Tensor& out_grad, const SweepGrads& grads) {
  const std::size_t B = g.batch, T = g.steps, h = g.hidden, W = g.width, ldo = g.out_cols();
  const std::size_t ldz = T * W, ldc = T * h;
  const double* o = out.data().data();
  const double* go = out_grad.data().data();
  const double* a = ws.gates.data();
  std::vector<double>& dz = ws.dz;
  dz.assign(B * T * W, 0.0);
  std::vector<double> dh(B * h), dh_next(B * h, 0.0), dc_next;
  std::vector<double> dc(g.kind == CellKind::lstm ? B * h : 0);
  if (g.kind == CellKind::lstm) {
    dc_next.assign(B * h, 0.0);
    for (std::size_t b = 0; b < B; ++b) std::copy_n(go + b * ldo + T * h, h, dc_next.data() + b * h);
  }
  std::vector<double> drh(g.kind == CellKind::gru ? B * h : 0);

  for (std::size_t i = T; i-- > 0;) {
    const std::size_t t = g.step(i);
    const double* h_prev = nullptr;
    std::size_t ld_prev = 0;
    if (i > 0) {
      h_prev = o + g.step(i - 1) * h;
      ld_prev = ldo;
    } else if (!ws.h0.empty()) {
      h_prev = ws.h0.data();
      ld_prev = h;
    }
    for (std::size_t b = 0; b < B; ++b)
      for (std::size_t j = 0; j < h; ++j) dh[b * h + j] = go[b * ldo + t * h + j] + dh_next[b * h + j];
    const double* at = a + t * W;
    double* dzt = dz.data() + t * W;

    switch (g.kind) {
      case CellKind::rnn:
        for (std::size_t b = 0; b < B; ++b) std::copy_n(dh.data() + b * h, h, dzt + b * ldz);
        activation_backward(g.act, at, ldz, dzt, ldz, B, h);
        break;
      case CellKind::lstm: {
        const double* ct_act = ws.cell_act.data() + t * h;
        const double* c_prev = i > 0 ? ws.cells.data() + g.step(i - 1) * h : (ws.c0.empty() ? nullptr : ws.c0.data());
        const std::size_t ld_cprev = i > 0 ? ldc : h;
        // dL/d act(c_t) staged in dc, then mapped back through the activation.
        for (std::size_t b = 0; b < B; ++b)
          for (std::size_t j = 0; j < h; ++j) {
            dc[b * h + j] = dh[b * h + j] * at[b * ldz + 3 * h + j];
            dzt[b * ldz + 3 * h + j] = dh[b * h + j] * ct_act[b * ldc + j];
          }
        activation_backward(g.act, ct_act, ldc, dc.data(), h, B, h);
        for (std::size_t b = 0; b < B; ++b)
          for (std::size_t j = 0; j < h; ++j) {
            const double d = dc[b * h + j] + dc_next[b * h + j];
            const double* gate = at + b * ldz;
            double* dgate = dzt + b * ldz;
            dgate[j] = d * gate[2 * h + j];
            dgate[h + j] = c_prev ? d * c_prev[b * ld_cprev + j] : 0.0;
            dgate[2 * h + j] = d * gate[j];
            dc_next[b * h + j] = d * gate[h + j];
          }
        sigmoid_backward(at, ldz, dzt, ldz, B, 2 * h);
        activation_backward(g.act, at + 2 * h, ldz, dzt + 2 * h, ldz, B, h);
        sigmoid_backward(at + 3 * h, ldz, dzt + 3 * h, ldz, B, h);
        break;
      }
      case CellKind::gru: {
        for (std::size_t b = 0; b < B; ++b)
          for (std::size_t j = 0; j < h; ++j) {
            const double u = at[b * ldz + j];
            const double cand = at[b * ldz + 2 * h + j];
            const double prev = h_prev ? h_prev[b * ld_prev + j] : 0.0;
            dzt[b * ldz + j] = dh[b * h + j] * (cand - prev);
            dzt[b * ldz + 2 * h + j] = dh[b * h + j] * u;
          }
        activation_backward(g.act, at + 2 * h, ldz, dzt + 2 * h, ldz, B, h);
        if (h_prev) {
          kernels::gemm(false, true, B, h, h, 1.0, dzt + 2 * h, ldz, wh.data().data() + 2 * h, W, 0.0, drh.data(), h);
          for (std::size_t b = 0; b < B; ++b)
            for (std::size_t j = 0; j < h; ++j) dzt[b * ldz + h + j] = drh[b * h + j] * h_prev[b * ld_prev + j];
        }
        sigmoid_backward(at, ldz, dzt, ldz, B, 2 * h);
        break;
      }
    }

    if (!h_prev) continue;
    const std::size_t gated = g.kind == CellKind::gru ? 2 * h : W;
    kernels::gemm(false, true, B, h, gated, 1.0, dzt, ldz, wh.data().data(), W, 0.0, dh_next.data(), h);
    if (g.kind == CellKind::gru) {
      for (std::size_t b = 0; b < B; ++b)
        for (std::size_t j = 0; j < h; ++j) {
          const double u = at[b * ldz + j];
          dh_next[b * h + j] += dh[b * h + j] * (1.0 - u) + drh[b * h + j] * at[b * ldz + h + j];
        }
    }
    if (grads.wh) {
      double* gw = grads.wh->data().data();
      kernels::gemm(true, false, h, gated, B, 1.0, h_prev, ld_prev, dzt, ldz, 1.0, gw, W);
      if (g.kind == CellKind::gru) {
        kernels::gemm(true, false, h, h, B, 1.0, ws.reset_h.data() + t * h, ldc, dzt + 2 * h, ldz, 1.0, gw + 2 * h, W);
      }
    }
  }

  if (grads.h0) add_state_grad(dh_next, B, h, *grads.h0);
  if (grads.c0 && !dc_next.empty()) add_state_grad(dc_next, B, h, *grads.c0);
  if (grads.bias) {
    for (std::size_t r = 0; r < B * T; ++r)
      for (std::size_t j = 0; j < W; ++j) (*grads.bias)[j] += dz[r * W + j];
  }
  if (grads.wx) {
    kernels::gemm(true, false, g.channels, W, B * T, 1.0, x.data().data(), g.channels, dz.data(), W, 1.0,
                  grads.wx->data().data(), W);
  }
  if (grads.x) {
    kernels::gemm(false, true, B * T, g.channels, W, 1.0, dz.data(), W, wx.data().data(), W, 1.0,
                  grads.x->data().data(), g.channels);
  }
}

}  // namespace

RecurrentOutput recurrent_forward(Tape& tape, CellKind kind, Var x, SequenceShape shape, const RecurrentParams& p,
                                  const RecurrentOptions& opts) {
  const auto [batch, h] = check_recurrent(tape, kind, x, shape, p);
  check_state(tape, opts.h0, batch, h, "h0");
  if (kind == CellKind::lstm) check_state(tape, opts.c0, batch, h, "c0");
  const Geometry g{kind, batch, shape.steps, shape.channels, h, gate_count(kind) * h, opts.reverse, opts.activation};

  std::shared_ptr<Workspace> ws = acquire_workspace();
  if (opts.h0) ws->h0 = expand_state(tape.value(*opts.h0), batch, h);
  const bool use_c0 = kind == CellKind::lstm && opts.c0.has_value();
  if (use_c0) ws->c0 = expand_state(tape.value(*opts.c0), batch, h);

  Tensor out({batch, g.out_cols()});
  forward_sweep(g, tape.value(x), tape.value(p.input_weights), tape.value(p.recurrent_weights), tape.value(p.bias), *ws,
                out);

  std::vector<Var> inputs{x, p.input_weights, p.recurrent_weights, p.bias};
  if (opts.h0) inputs.push_back(*opts.h0);
  if (use_c0) inputs.push_back(*opts.c0);
  const bool has_h0 = opts.h0.has_value();
  const Var xv = x, wxv = p.input_weights, whv = p.recurrent_weights;
  Var combined = tape.record(
      std::move(out), std::move(inputs),
      [g, ws, xv, wxv, whv, has_h0, use_c0](const Tape& t, const Tensor& y, const Tensor& gy,
                                           std::span<Tensor* const> in) {
        SweepGrads grads{in[0], in[1], in[2], in[3], has_h0 ? in[4] : nullptr,
                         use_c0 ? in[has_h0 ? 5 : 4] : nullptr};
        backward_sweep(g, t.value(xv), t.value(wxv), t.value(whv), *ws, y, gy, grads);
      });

  RecurrentOutput result;
  result.sequence = slice_cols(tape, combined, 0, shape.steps * h);
  result.last_h = slice_cols(tape, combined, g.step(shape.steps - 1) * h, h);
  if (kind == CellKind::lstm) result.last_c = slice_cols(tape, combined, shape.steps * h, h);
  return result;
}

RecurrentOutput rnn_forward(Tape& tape, Var x, SequenceShape shape, const RecurrentParams& p,
                            const RecurrentOptions& opts) {
  return recurrent_forward(tape, CellKind::rnn, x, shape, p, opts);
}

RecurrentOutput lstm_forward(Tape& tape, Var x, SequenceShape shape, const RecurrentParams& p,
                             const RecurrentOptions& opts) {
  return recurrent_forward(tape, CellKind::lstm, x, shape, p, opts);
}

RecurrentOutput gru_forward(Tape& tape, Var x, SequenceShape shape, const RecurrentParams& p,
                            const RecurrentOptions& opts) {
  return recurrent_forward(tape, CellKind::gru, x, shape, p, opts);
}

Var interleave_steps(Tape& tape, Var a, Var b, std::size_t steps) {
  const Tensor& av = tape.value(a);
  const Tensor& bv = tape.value(b);
  if (av.rank() != 2 || !av.same_shape(bv) || steps == 0 || av.cols() % steps != 0) {
    throw DimensionError("interleave_steps: " + to_string(av.shape()) + " vs " + to_string(bv.shape()));
  }
  const std::size_t rows = av.rows(), w = av.cols() / steps;
  Tensor out({rows, 2 * av.cols()});
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t t = 0; t < steps; ++t) {
      std::copy_n(av.data().data() + r * av.cols() + t * w, w, out.data().data() + r * out.cols() + 2 * t * w);
      std::copy_n(bv.data().data() + r * av.cols() + t * w, w, out.data().data() + r * out.cols() + (2 * t + 1) * w);
    }
  return tape.record(std::move(out), {a, b},
                     [rows, steps, w](const Tape&, const Tensor&, const Tensor& g, std::span<Tensor* const> grads) {
                       for (std::size_t k = 0; k < 2; ++k) {
                         if (!grads[k]) continue;
                         Tensor& gk = *grads[k];
                         for (std::size_t r = 0; r < rows; ++r)
                           for (std::size_t t = 0; t < steps; ++t)
                             for (std::size_t j = 0; j < w; ++j)
                               gk[r * steps * w + t * w + j] += g[r * 2 * steps * w + (2 * t + k) * w + j];
                       }
                     });
}

Var bidirectional(Tape& tape, CellKind kind, Var x, SequenceShape shape, const RecurrentParams& forward,
                  const RecurrentParams& backward, BidirectionalMode mode, Activation act) {
  const Tensor& wf = tape.value(forward.recurrent_weights);
  const Tensor& wb = tape.value(backward.recurrent_weights);
  if (wf.rank() != 2 || wb.rank() != 2 || wf.shape()[0] != wb.shape()[0]) {
    throw ConfigError("bidirectional: forward hidden size " + std::to_string(wf.shape()[0]) +
                      " differs from backward hidden size " + std::to_string(wb.shape()[0]));
  }
  RecurrentOptions fwd_opts;
  fwd_opts.activation = act;
  RecurrentOptions bwd_opts = fwd_opts;
  bwd_opts.reverse = true;
  const RecurrentOutput fwd = recurrent_forward(tape, kind, x, shape, forward, fwd_opts);
  const RecurrentOutput bwd = recurrent_forward(tape, kind, x, shape, backward, bwd_opts);

  if (mode == BidirectionalMode::final_state) {
    const Var parts[] = {fwd.last_h, bwd.last_h};
    return concat_cols(tape, parts);
  }
  return interleave_steps(tape, fwd.sequence, bwd.sequence, shape.steps);
}

namespace {

void check_probability_rows(const Tensor& pred, const Tensor& target) {
  if (!pred.same_shape(target)) {
    throw DimensionError("loss: prediction " + to_string(pred.shape()) + " vs target " + to_string(target.shape()));
  }
  if (pred.rank() > 2 || pred.size() == 0) throw DimensionError("loss expects [batch x classes], got " + to_string(pred.shape()));
}

}  // namespace

Var cross_entropy(Tape& tape, Var pred, Var target) {
  const Tensor& p = tape.value(pred);
  const Tensor& t = tape.value(target);
  check_probability_rows(p, t);
  const std::size_t rows = p.rows(), cols = p.cols();
  for (std::size_t r = 0; r < rows; ++r) {
    double total = 0.0;
    std::size_t ones = 0;
    for (std::size_t c = 0; c < cols; ++c) {
      total += p[r * cols + c];
      const double tv = t[r * cols + c];
      if (tv == 1.0) {
        ++ones;
      } else if (tv != 0.0) {
        throw ValidationError("cross_entropy: target row " + std::to_string(r) + " is not one-hot");
      }
    }
    if (std::abs(total - 1.0) > 1e-6) {
      throw ValidationError("cross_entropy: prediction row " + std::to_string(r) + " sums to " + std::to_string(total));
    }
    if (ones != 1) throw ValidationError("cross_entropy: target row " + std::to_string(r) + " is not one-hot");
  }
  Var logp = log(tape, affine(tape, pred, 1.0, 1e-12));
  Var total = sum(tape, mul(tape, target, logp));
  return affine(tape, total, -1.0 / static_cast<double>(rows), 0.0);
}

Var binary_cross_entropy(Tape& tape, Var pred, Var target) {
  const Tensor& p = tape.value(pred);
  const Tensor& t = tape.value(target);
  check_probability_rows(p, t);
  if (p.cols() != 1) throw DimensionError("binary_cross_entropy expects [batch x 1], got " + to_string(p.shape()));
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!(p[i] >= 0.0 && p[i] <= 1.0)) throw ValidationError("binary_cross_entropy: prediction outside [0, 1]");
    if (t[i] != 0.0 && t[i] != 1.0) throw ValidationError("binary_cross_entropy: target must be 0 or 1");
  }
  Var pos = mul(tape, target, log(tape, affine(tape, pred, 1.0, 1e-12)));
  Var neg_part = mul(tape, affine(tape, target, -1.0, 1.0), log(tape, affine(tape, pred, -1.0, 1.0 + 1e-12)));
  Var total = sum(tape, add(tape, pos, neg_part));
  return affine(tape, total, -1.0 / static_cast<double>(p.rows()), 0.0);
}

}  // namespace botstack
