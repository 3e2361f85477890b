#include "botstack/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Core>

#include "botstack/error.hpp"

namespace botstack {

namespace kernels {

namespace {

void require_matrix(const Tensor& t, const char* what) {
  if (t.rank() != 2) throw DimensionError(std::string(what) + " expects a rank-2 tensor, got " + to_string(t.shape()));
}

}  // namespace

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstView = Eigen::Map<const RowMatrix, 0, Eigen::OuterStride<>>;
using View = Eigen::Map<RowMatrix, 0, Eigen::OuterStride<>>;

template <typename A, typename B>
void gemm_apply(const A& a, const B& b, double alpha, double beta, View& c) {
  if (beta == 0.0) {
    c.noalias() = alpha * (a * b);
    return;
  }
  if (beta != 1.0) c *= beta;
  c.noalias() += alpha * (a * b);
}

}  // namespace

void gemm(bool trans_a, bool trans_b, std::size_t m, std::size_t n, std::size_t k, double alpha, const double* a,
          std::size_t lda, const double* b, std::size_t ldb, double beta, double* c, std::size_t ldc) {
  if (m == 0 || n == 0) return;
  const auto em = static_cast<Eigen::Index>(m), en = static_cast<Eigen::Index>(n), ek = static_cast<Eigen::Index>(k);
  View cv(c, em, en, Eigen::OuterStride<>(static_cast<Eigen::Index>(ldc)));
  if (k == 0) {
    if (beta == 0.0) {
      cv.setZero();
    } else {
      cv *= beta;
    }
    return;
  }
  const ConstView av = trans_a ? ConstView(a, ek, em, Eigen::OuterStride<>(static_cast<Eigen::Index>(lda)))
                               : ConstView(a, em, ek, Eigen::OuterStride<>(static_cast<Eigen::Index>(lda)));
  const ConstView bv = trans_b ? ConstView(b, en, ek, Eigen::OuterStride<>(static_cast<Eigen::Index>(ldb)))
                               : ConstView(b, ek, en, Eigen::OuterStride<>(static_cast<Eigen::Index>(ldb)));
  if (trans_a && trans_b) {
    gemm_apply(av.transpose(), bv.transpose(), alpha, beta, cv);
  } else if (trans_a) {
    gemm_apply(av.transpose(), bv, alpha, beta, cv);
  } else if (trans_b) {
    gemm_apply(av, bv.transpose(), alpha, beta, cv);
  } else {
    gemm_apply(av, bv, alpha, beta, cv);
  }
}

void matmul_into(const Tensor& a, bool trans_a, const Tensor& b, bool trans_b, Tensor& c, double beta) {
  require_matrix(a, "matmul");
  require_matrix(b, "matmul");
  const std::size_t m = trans_a ? a.shape()[1] : a.shape()[0];
  const std::size_t k = trans_a ? a.shape()[0] : a.shape()[1];
  const std::size_t kb = trans_b ? b.shape()[1] : b.shape()[0];
  const std::size_t n = trans_b ? b.shape()[0] : b.shape()[1];
  if (k != kb) {
    throw DimensionError("matmul inner dimensions differ: " + to_string(a.shape()) + (trans_a ? "^T" : "") + " * " +
                         to_string(b.shape()) + (trans_b ? "^T" : ""));
  }
  if (c.rank() != 2 || c.shape()[0] != m || c.shape()[1] != n) {
    throw DimensionError("matmul output " + to_string(c.shape()) + " does not match [" + std::to_string(m) + " x " +
                         std::to_string(n) + "]");
  }
  gemm(trans_a, trans_b, m, n, k, 1.0, a.data().data(), a.shape()[1], b.data().data(), b.shape()[1], beta,
       c.data().data(), n);
}

namespace {

Tensor product(const Tensor& a, bool trans_a, const Tensor& b, bool trans_b) {
  require_matrix(a, "matmul");
  require_matrix(b, "matmul");
  Tensor c({trans_a ? a.shape()[1] : a.shape()[0], trans_b ? b.shape()[0] : b.shape()[1]});
  matmul_into(a, trans_a, b, trans_b, c, 0.0);
  return c;
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) { return product(a, false, b, false); }

Tensor transpose(const Tensor& a) {
  require_matrix(a, "transpose");
  const std::size_t m = a.shape()[0], n = a.shape()[1];
  Tensor t({n, m});
  const double* src = a.data().data();
  double* dst = t.data().data();
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) dst[j * m + i] = src[i * n + j];
  return t;
}

Tensor matmul_nt(const Tensor& a, const Tensor& b) { return product(a, false, b, true); }

Tensor matmul_tn(const Tensor& a, const Tensor& b) { return product(a, true, b, false); }

void logistic(const double* in, double* out, std::size_t n) {
  // Eigen computes unaligned head and tail elements with a scalar formula
  // that rounds differently from its packet one, so go through an aligned
  // buffer padded to whole packets.
  constexpr std::size_t kChunk = 512;
  alignas(64) thread_local double scratch[kChunk];
  for (std::size_t start = 0; start < n; start += kChunk) {
    const std::size_t len = std::min(kChunk, n - start);
    const std::size_t padded = (len + 7) / 8 * 8;
    std::copy(in + start, in + start + len, scratch);
    std::fill(scratch + len, scratch + padded, 0.0);
    Eigen::Map<Eigen::ArrayXd, Eigen::Aligned64> v(scratch, static_cast<Eigen::Index>(padded));
    v = v.logistic();
    std::copy(scratch, scratch + len, out + start);
  }
}

}  // namespace kernels

namespace {

// ---------------------------------------------------------------------------
// Broadcasting for binary elementwise operations.

enum class Operand { full, scalar, row };

struct BinaryPlan {
  Shape shape;
  Operand a = Operand::full;
  Operand b = Operand::full;
  std::size_t row_len = 0;
};

bool is_row(const Tensor& t) { return t.rank() == 1 || (t.rank() == 2 && t.shape()[0] == 1); }

BinaryPlan plan_binary(const Tensor& a, const Tensor& b, const char* op) {
  BinaryPlan plan;
  if (a.shape() == b.shape()) {
    plan.shape = a.shape();
    return plan;
  }
  if (b.size() == 1) {
    plan.shape = a.shape();
    plan.b = Operand::scalar;
    return plan;
  }
  if (a.size() == 1) {
    plan.shape = b.shape();
    plan.a = Operand::scalar;
    return plan;
  }
  if (is_row(b) && a.rank() == 2 && b.size() == a.shape()[1]) {
    plan.shape = a.shape();
    plan.b = Operand::row;
    plan.row_len = b.size();
    return plan;
  }
  if (is_row(a) && b.rank() == 2 && a.size() == b.shape()[1]) {
    plan.shape = b.shape();
    plan.a = Operand::row;
    plan.row_len = a.size();
    return plan;
  }
  throw DimensionError(std::string(op) + ": shapes " + to_string(a.shape()) + " and " + to_string(b.shape()) +
                       " are not broadcast-compatible");
}

inline std::size_t index_of(Operand mode, std::size_t flat, std::size_t row_len) {
  switch (mode) {
    case Operand::full: return flat;
    case Operand::scalar: return 0;
    case Operand::row: return flat % row_len;
  }
  return flat;
}

// Adds `contribution` (result-shaped) into `grad` (operand-shaped), summing
// over the broadcast axes.
void reduce_into(Tensor& grad, const std::vector<double>& contribution, Operand mode, std::size_t row_len) {
  double* g = grad.data().data();
  switch (mode) {
    case Operand::full:
      for (std::size_t i = 0; i < contribution.size(); ++i) g[i] += contribution[i];
      break;
    case Operand::scalar: {
      double s = 0.0;
      for (double v : contribution) s += v;
      g[0] += s;
      break;
    }
    case Operand::row:
      for (std::size_t i = 0; i < contribution.size(); ++i) g[i % row_len] += contribution[i];
      break;
  }
}

template <class Forward, class GradA, class GradB>
Var binary_op(Tape& tape, Var av, Var bv, const char* name, Forward f, GradA dfa, GradB dfb) {
  const Tensor& a = tape.value(av);
  const Tensor& b = tape.value(bv);
  const BinaryPlan plan = plan_binary(a, b, name);
  Tensor out(plan.shape);
  const std::size_t n = out.size();
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = f(a[index_of(plan.a, i, plan.row_len)], b[index_of(plan.b, i, plan.row_len)]);
  }
  return tape.record(std::move(out), {av, bv},
                     [av, bv, plan, dfa, dfb](const Tape& t, const Tensor&, const Tensor& g, std::span<Tensor* const> grads) {
                       const Tensor& a = t.value(av);
                       const Tensor& b = t.value(bv);
                       const std::size_t n = g.size();
                       std::vector<double> contrib(n);
                       if (grads[0]) {
                         for (std::size_t i = 0; i < n; ++i) {
                           contrib[i] = g[i] * dfa(a[index_of(plan.a, i, plan.row_len)],
                                                   b[index_of(plan.b, i, plan.row_len)]);
                         }
                         reduce_into(*grads[0], contrib, plan.a, plan.row_len);
                       }
                       if (grads[1]) {
                         for (std::size_t i = 0; i < n; ++i) {
                           contrib[i] = g[i] * dfb(a[index_of(plan.a, i, plan.row_len)],
                                                   b[index_of(plan.b, i, plan.row_len)]);
                         }
                         reduce_into(*grads[1], contrib, plan.b, plan.row_len);
                       }
                     });
}

// Unary op whose derivative is expressed through input x and output y.
template <class Forward, class Deriv>
Var unary_op(Tape& tape, Var av, Forward f, Deriv df) {
  const Tensor& a = tape.value(av);
  Tensor out(a.shape());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = f(a[i]);
  return tape.record(std::move(out), {av},
                     [av, df](const Tape& t, const Tensor& y, const Tensor& g, std::span<Tensor* const> grads) {
                       const Tensor& a = t.value(av);
                       Tensor& ga = *grads[0];
                       for (std::size_t i = 0; i < a.size(); ++i) ga[i] += g[i] * df(a[i], y[i]);
                     });
}

}  // namespace

Var matmul(Tape& tape, Var a, Var b) {
  Tensor out = kernels::matmul(tape.value(a), tape.value(b));
  return tape.record(std::move(out), {a, b}, [a, b](const Tape& t, const Tensor&, const Tensor& g, std::span<Tensor* const> grads) {
    if (grads[0]) kernels::matmul_into(g, false, t.value(b), true, *grads[0], 1.0);
    if (grads[1]) kernels::matmul_into(t.value(a), true, g, false, *grads[1], 1.0);
  });
}

Var add(Tape& tape, Var a, Var b) {
  return binary_op(
      tape, a, b, "add", [](double x, double y) { return x + y; }, [](double, double) { return 1.0; },
      [](double, double) { return 1.0; });
}

Var sub(Tape& tape, Var a, Var b) {
  return binary_op(
      tape, a, b, "sub", [](double x, double y) { return x - y; }, [](double, double) { return 1.0; },
      [](double, double) { return -1.0; });
}

Var mul(Tape& tape, Var a, Var b) {
  return binary_op(
      tape, a, b, "mul", [](double x, double y) { return x * y; }, [](double, double y) { return y; },
      [](double x, double) { return x; });
}

Var neg(Tape& tape, Var a) {
  return unary_op(tape, a, [](double x) { return -x; }, [](double, double) { return -1.0; });
}

Var exp(Tape& tape, Var a) {
  return unary_op(tape, a, [](double x) { return std::exp(x); }, [](double, double y) { return y; });
}

Var log(Tape& tape, Var a) {
  const Tensor& v = tape.value(a);
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!(v[i] > 0.0)) throw DomainError("log of non-positive value " + std::to_string(v[i]) + " at index " + std::to_string(i));
  }
  return unary_op(tape, a, [](double x) { return std::log(x); }, [](double x, double) { return 1.0 / x; });
}

Var relu(Tape& tape, Var a) {
  return unary_op(
      tape, a, [](double x) { return x > 0.0 ? x : 0.0; }, [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

// sigmoid goes through kernels::logistic; its derivative is written in terms
// of the output y. tanh stays on std::tanh: building it from the logistic
// quadruples its rounding noise, which finite-difference checks pick up.
Var sigmoid(Tape& tape, Var av) {
  const Tensor& a = tape.value(av);
  Tensor out(a.shape());
  kernels::logistic(a.data().data(), out.data().data(), a.size());
  return tape.record(std::move(out), {av}, [](const Tape&, const Tensor& y, const Tensor& g, std::span<Tensor* const> grads) {
    Tensor& ga = *grads[0];
    for (std::size_t i = 0; i < y.size(); ++i) ga[i] += g[i] * y[i] * (1.0 - y[i]);
  });
}

Var tanh(Tape& tape, Var a) {
  return unary_op(tape, a, [](double x) { return std::tanh(x); }, [](double, double y) { return 1.0 - y * y; });
}

Var affine(Tape& tape, Var a, double scale, double shift) {
  return unary_op(
      tape, a, [scale, shift](double x) { return scale * x + shift; }, [scale](double, double) { return scale; });
}

Var softmax(Tape& tape, Var a) {
  const Tensor& x = tape.value(a);
  Tensor out(x.shape());
  const std::size_t rows = x.rows(), cols = x.cols();
  for (std::size_t r = 0; r < rows; ++r) {
    const double* in = x.data().data() + r * cols;
    double* o = out.data().data() + r * cols;
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < cols; ++c) mx = std::max(mx, in[c]);
    double total = 0.0;
    for (std::size_t c = 0; c < cols; ++c) {
      o[c] = std::exp(in[c] - mx);
      total += o[c];
    }
    for (std::size_t c = 0; c < cols; ++c) o[c] /= total;
  }
  return tape.record(std::move(out), {a},
                     [rows, cols](const Tape&, const Tensor& y, const Tensor& g, std::span<Tensor* const> grads) {
                       Tensor& ga = *grads[0];
                       for (std::size_t r = 0; r < rows; ++r) {
                         const double* yr = y.data().data() + r * cols;
                         const double* gr = g.data().data() + r * cols;
                         double dot = 0.0;
                         for (std::size_t c = 0; c < cols; ++c) dot += gr[c] * yr[c];
                         double* out = ga.data().data() + r * cols;
                         for (std::size_t c = 0; c < cols; ++c) out[c] += yr[c] * (gr[c] - dot);
                       }
                     });
}

Var sum(Tape& tape, Var a) {
  const Tensor& x = tape.value(a);
  double s = 0.0;
  for (double v : x.data()) s += v;
  return tape.record(Tensor::scalar(s), {a}, [](const Tape&, const Tensor&, const Tensor& g, std::span<Tensor* const> grads) {
    const double gv = g[0];
    for (double& v : grads[0]->data()) v += gv;
  });
}

Var mean(Tape& tape, Var a) {
  const std::size_t n = tape.value(a).size();
  if (n == 0) throw UsageError("mean of an empty tensor");
  return affine(tape, sum(tape, a), 1.0 / static_cast<double>(n), 0.0);
}

Var slice_cols(Tape& tape, Var a, std::size_t begin, std::size_t count) {
  const Tensor& x = tape.value(a);
  if (x.rank() > 2) throw DimensionError("slice_cols expects rank 1 or 2, got " + to_string(x.shape()));
  const std::size_t rows = x.rows(), cols = x.cols();
  if (begin + count > cols || count == 0) {
    throw DimensionError("slice [" + std::to_string(begin) + ", " + std::to_string(begin + count) + ") outside " +
                         to_string(x.shape()));
  }
  Tensor out(x.rank() == 1 ? Shape{count} : Shape{rows, count});
  for (std::size_t r = 0; r < rows; ++r) {
    std::copy_n(x.data().data() + r * cols + begin, count, out.data().data() + r * count);
  }
  return tape.record(std::move(out), {a},
                     [rows, cols, begin, count](const Tape&, const Tensor&, const Tensor& g, std::span<Tensor* const> grads) {
                       double* ga = grads[0]->data().data();
                       for (std::size_t r = 0; r < rows; ++r) {
                         const double* gr = g.data().data() + r * count;
                         double* dst = ga + r * cols + begin;
                         for (std::size_t c = 0; c < count; ++c) dst[c] += gr[c];
                       }
                     });
}

Var concat_cols(Tape& tape, std::span<const Var> parts) {
  if (parts.empty()) throw UsageError("concat_cols needs at least one operand");
  const Tensor& first = tape.value(parts[0]);
  const std::size_t rank = first.rank();
  const std::size_t rows = first.rows();
  std::vector<std::size_t> widths;
  std::size_t total = 0;
  for (const Var& p : parts) {
    const Tensor& t = tape.value(p);
    if (t.rank() != rank || t.rows() != rows || rank > 2) {
      throw DimensionError("concat_cols: " + to_string(t.shape()) + " does not stack with " + to_string(first.shape()));
    }
    widths.push_back(t.cols());
    total += t.cols();
  }
  Tensor out(rank == 1 ? Shape{total} : Shape{rows, total});
  std::size_t offset = 0;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const Tensor& t = tape.value(parts[k]);
    for (std::size_t r = 0; r < rows; ++r) {
      std::copy_n(t.data().data() + r * widths[k], widths[k], out.data().data() + r * total + offset);
    }
    offset += widths[k];
  }
  return tape.record(std::move(out), std::vector<Var>(parts.begin(), parts.end()),
                     [widths, rows, total](const Tape&, const Tensor&, const Tensor& g, std::span<Tensor* const> grads) {
                       std::size_t offset = 0;
                       for (std::size_t k = 0; k < widths.size(); ++k) {
                         if (grads[k]) {
                           double* dst = grads[k]->data().data();
                           for (std::size_t r = 0; r < rows; ++r) {
                             const double* src = g.data().data() + r * total + offset;
                             for (std::size_t c = 0; c < widths[k]; ++c) dst[r * widths[k] + c] += src[c];
                           }
                         }
                         offset += widths[k];
                       }
                     });
}

Var reshape(Tape& tape, Var a, Shape shape) {
  Tensor out = tape.value(a).reshaped(std::move(shape));
  return tape.record(std::move(out), {a}, [](const Tape&, const Tensor&, const Tensor& g, std::span<Tensor* const> grads) {
    double* dst = grads[0]->data().data();
    for (std::size_t i = 0; i < g.size(); ++i) dst[i] += g[i];
  });
}

Var elementwise(Tape& tape, ElementwiseKind kind, std::span<const Var> operands) {
  const bool unary = kind == ElementwiseKind::neg || kind == ElementwiseKind::exp || kind == ElementwiseKind::log ||
                     kind == ElementwiseKind::relu;
  if (operands.size() != (unary ? 1u : 2u)) {
    throw UsageError("elementwise: wrong operand count " + std::to_string(operands.size()));
  }
  switch (kind) {
    case ElementwiseKind::add: return add(tape, operands[0], operands[1]);
    case ElementwiseKind::sub: return sub(tape, operands[0], operands[1]);
    case ElementwiseKind::mul: return mul(tape, operands[0], operands[1]);
    case ElementwiseKind::neg: return neg(tape, operands[0]);
    case ElementwiseKind::exp: return exp(tape, operands[0]);
    case ElementwiseKind::log: return log(tape, operands[0]);
    case ElementwiseKind::relu: return relu(tape, operands[0]);
  }
  throw UsageError("unknown elementwise kind");
}

std::size_t conv1d_output_steps(std::size_t steps, std::size_t kernel, std::size_t stride, std::size_t padding) {
  if (stride == 0) throw DimensionError("conv1d stride must be positive");
  if (kernel == 0 || kernel > steps + 2 * padding) {
    throw DimensionError("conv1d kernel " + std::to_string(kernel) + " larger than padded input " +
                         std::to_string(steps + 2 * padding));
  }
  return (steps + 2 * padding - kernel) / stride + 1;
}

Var conv1d(Tape& tape, Var xv, Var wv, Var bv, const Conv1dGeometry& geo) {
  const Tensor& x = tape.value(xv);
  const Tensor& w = tape.value(wv);
  const Tensor& bias = tape.value(bv);
  if (w.rank() != 3) throw DimensionError("conv1d kernels must be [out x in x k], got " + to_string(w.shape()));
  const std::size_t c_out = w.shape()[0], c_in = w.shape()[1], k = w.shape()[2];
  if (c_in != geo.in_channels) {
    throw DimensionError("conv1d kernels expect " + std::to_string(c_in) + " input channels, geometry has " +
                         std::to_string(geo.in_channels));
  }
  if (x.rank() != 2 || x.cols() != geo.steps * geo.in_channels) {
    throw DimensionError("conv1d input " + to_string(x.shape()) + " does not match " + std::to_string(geo.steps) +
                         " steps x " + std::to_string(geo.in_channels) + " channels");
  }
  if (bias.size() != c_out) throw DimensionError("conv1d bias " + to_string(bias.shape()) + " for " + std::to_string(c_out) + " channels");
  const std::size_t t_out = conv1d_output_steps(geo.steps, k, geo.stride, geo.padding);
  const std::size_t batch = x.rows();
  const std::size_t steps = geo.steps, stride = geo.stride, pad = geo.padding;

  // Weights rearranged to [k*c_in x c_out] and windows unrolled to rows of
  // [batch*t_out x k*c_in], so the convolution is a single product.
  const std::size_t span = k * c_in;
  std::vector<double> wt(span * c_out);
  for (std::size_t co = 0; co < c_out; ++co)
    for (std::size_t ci = 0; ci < c_in; ++ci)
      for (std::size_t j = 0; j < k; ++j) wt[(j * c_in + ci) * c_out + co] = w[(co * c_in + ci) * k + j];

  auto window_start = [stride, pad](std::size_t t, std::size_t j) {
    return static_cast<std::ptrdiff_t>(t * stride + j) - static_cast<std::ptrdiff_t>(pad);
  };
  std::vector<double> cols(batch * t_out * span, 0.0);
  for (std::size_t b = 0; b < batch; ++b) {
    const double* xrow = x.data().data() + b * steps * c_in;
    for (std::size_t t = 0; t < t_out; ++t) {
      double* row = cols.data() + (b * t_out + t) * span;
      for (std::size_t j = 0; j < k; ++j) {
        const std::ptrdiff_t src = window_start(t, j);
        if (src < 0 || src >= static_cast<std::ptrdiff_t>(steps)) continue;
        std::copy_n(xrow + static_cast<std::size_t>(src) * c_in, c_in, row + j * c_in);
      }
    }
  }

  Tensor out({batch, t_out * c_out});
  double* o = out.data().data();
  for (std::size_t r = 0; r < batch * t_out; ++r)
    for (std::size_t co = 0; co < c_out; ++co) o[r * c_out + co] = bias[co];
  kernels::gemm(false, false, batch * t_out, c_out, span, 1.0, cols.data(), span, wt.data(), c_out, 1.0, o, c_out);

  return tape.record(
      std::move(out), {xv, wv, bv},
      [wt = std::move(wt), cols = std::move(cols), batch, steps, c_in, c_out, k, t_out, span, window_start](
          const Tape&, const Tensor&, const Tensor& g, std::span<Tensor* const> grads) {
        const std::size_t rows = batch * t_out;
        if (grads[2]) {
          double* db = grads[2]->data().data();
          for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t co = 0; co < c_out; ++co) db[co] += g[r * c_out + co];
        }
        if (grads[1]) {
          std::vector<double> dwt(span * c_out, 0.0);
          kernels::gemm(true, false, span, c_out, rows, 1.0, cols.data(), span, g.data().data(), c_out, 0.0,
                        dwt.data(), c_out);
          double* dw = grads[1]->data().data();
          for (std::size_t co = 0; co < c_out; ++co)
            for (std::size_t ci = 0; ci < c_in; ++ci)
              for (std::size_t j = 0; j < k; ++j) dw[(co * c_in + ci) * k + j] += dwt[(j * c_in + ci) * c_out + co];
        }
        if (grads[0]) {
          std::vector<double> dcols(rows * span, 0.0);
          kernels::gemm(false, true, rows, span, c_out, 1.0, g.data().data(), c_out, wt.data(), c_out, 0.0,
                        dcols.data(), span);
          double* dx = grads[0]->data().data();
          for (std::size_t b = 0; b < batch; ++b)
            for (std::size_t t = 0; t < t_out; ++t) {
              const double* row = dcols.data() + (b * t_out + t) * span;
              for (std::size_t j = 0; j < k; ++j) {
                const std::ptrdiff_t src = window_start(t, j);
                if (src < 0 || src >= static_cast<std::ptrdiff_t>(steps)) continue;
                double* dst = dx + b * steps * c_in + static_cast<std::size_t>(src) * c_in;
                for (std::size_t ci = 0; ci < c_in; ++ci) dst[ci] += row[j * c_in + ci];
              }
            }
        }
      });
}

Var maxpool1d(Tape& tape, Var xv, std::size_t steps, std::size_t channels, std::size_t size, std::size_t stride) {
  const Tensor& x = tape.value(xv);
  if (x.rank() != 2 || x.cols() != steps * channels) {
    throw DimensionError("maxpool1d input " + to_string(x.shape()) + " does not match " + std::to_string(steps) +
                         " steps x " + std::to_string(channels) + " channels");
  }
  if (size == 0 || stride == 0 || size > steps) {
    throw DimensionError("maxpool1d window " + std::to_string(size) + " invalid for " + std::to_string(steps) + " steps");
  }
  const std::size_t t_out = (steps - size) / stride + 1;
  const std::size_t batch = x.rows();
  Tensor out({batch, t_out * channels});
  std::vector<std::size_t> argmax(out.size());
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t t = 0; t < t_out; ++t) {
      for (std::size_t c = 0; c < channels; ++c) {
        std::size_t best = b * steps * channels + (t * stride) * channels + c;
        for (std::size_t j = 1; j < size; ++j) {
          const std::size_t idx = b * steps * channels + (t * stride + j) * channels + c;
          if (x[idx] > x[best]) best = idx;
        }
        const std::size_t o = (b * t_out + t) * channels + c;
        out[o] = x[best];
        argmax[o] = best;
      }
    }
  }
  return tape.record(std::move(out), {xv},
                     [argmax = std::move(argmax)](const Tape&, const Tensor&, const Tensor& g, std::span<Tensor* const> grads) {
                       double* dst = grads[0]->data().data();
                       for (std::size_t o = 0; o < argmax.size(); ++o) dst[argmax[o]] += g[o];
                     });
}

}  // namespace botstack
