#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "botstack/autodiff.hpp"
#include "botstack/tensor.hpp"

namespace botstack {

namespace kernels {
// Plain value-level kernels (no tape). C = A * B with A [m x k], B [k x n].
Tensor matmul(const Tensor& a, const Tensor& b);
// C = A * B^T with A [m x k], B [n x k].
Tensor matmul_nt(const Tensor& a, const Tensor& b);
// C = A^T * B with A [k x m], B [k x n].
Tensor matmul_tn(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);
// c = op(a) * op(b) + beta * c, shapes checked against c.
void matmul_into(const Tensor& a, bool trans_a, const Tensor& b, bool trans_b, Tensor& c, double beta);
// Row-major strided GEMM: C[m x n] = alpha * op(A) * op(B) + beta * C.
void gemm(bool trans_a, bool trans_b, std::size_t m, std::size_t n, std::size_t k, double alpha, const double* a,
          std::size_t lda, const double* b, std::size_t ldb, double beta, double* c, std::size_t ldc);
// out[i] = 1 / (1 + exp(-in[i])); in and out may alias. Every element takes
// the same vectorized path, so a value's result does not depend on where it
// sits in memory.
void logistic(const double* in, double* out, std::size_t n);
}  // namespace kernels

// Differentiable primitives. Each records its local gradient rule on the tape
// that owns its operands; mixing tapes raises TapeError.
//
// Broadcasting in binary elementwise ops is restricted to two cases:
//   * one operand is a scalar (exactly one element);
//   * one operand is a row, rank-1 [n] or rank-2 [1 x n], and the other is
//     [m x n]: the row repeats along the leading axis.
// Anything else is a DimensionError. The result has the larger shape.

Var matmul(Tape& tape, Var a, Var b);

Var add(Tape& tape, Var a, Var b);
Var sub(Tape& tape, Var a, Var b);
Var mul(Tape& tape, Var a, Var b);
Var neg(Tape& tape, Var a);
Var exp(Tape& tape, Var a);
/// Natural log; any non-positive element is a DomainError.
Var log(Tape& tape, Var a);
/// max(a, 0); the subgradient at 0 is taken as 0.
Var relu(Tape& tape, Var a);
Var sigmoid(Tape& tape, Var a);
Var tanh(Tape& tape, Var a);
/// scale * a + shift, elementwise.
Var affine(Tape& tape, Var a, double scale, double shift);

/// Softmax along the trailing axis (rank-1 input is one row), computed with
/// max subtraction.
Var softmax(Tape& tape, Var a);

Var sum(Tape& tape, Var a);
Var mean(Tape& tape, Var a);

/// Columns [begin, begin + count) of a rank-2 tensor, or elements of a rank-1 one.
Var slice_cols(Tape& tape, Var a, std::size_t begin, std::size_t count);
/// Concatenation along the trailing axis; all parts share the leading extent.
Var concat_cols(Tape& tape, std::span<const Var> parts);
Var reshape(Tape& tape, Var a, Shape shape);

enum class ElementwiseKind { add, sub, mul, neg, exp, log, relu };
/// Dispatch for the elementwise family; unary kinds take one operand.
Var elementwise(Tape& tape, ElementwiseKind kind, std::span<const Var> operands);

/// Geometry of a batch of sequences stored as [batch x (steps * channels)],
/// step-major: element (t, c) of row b is at column t * channels + c.
struct Conv1dGeometry {
  std::size_t steps = 0;
  std::size_t in_channels = 0;
  std::size_t stride = 1;
  std::size_t padding = 0;
};

std::size_t conv1d_output_steps(std::size_t steps, std::size_t kernel, std::size_t stride, std::size_t padding);

/// Cross-correlation (no kernel flip) with zero padding.
/// x [B x T*C_in], kernels [C_out x C_in x k], bias [C_out] -> [B x T'*C_out]
/// with T' = floor((T + 2p - k) / s) + 1.
Var conv1d(Tape& tape, Var x, Var kernels, Var bias, const Conv1dGeometry& geometry);

/// Non-overlapping-or-strided max pooling over steps, per channel.
/// x [B x T*C] -> [B x T'*C] with T' = floor((T - size) / stride) + 1.
Var maxpool1d(Tape& tape, Var x, std::size_t steps, std::size_t channels, std::size_t size, std::size_t stride);

}  // namespace botstack
