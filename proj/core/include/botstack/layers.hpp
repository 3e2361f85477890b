#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "botstack/autodiff.hpp"
#include "botstack/ops.hpp"
#include "botstack/tensor.hpp"

namespace botstack {

enum class Activation { relu, tanh, sigmoid, softmax };

Activation parse_activation(std::string_view name);
std::string_view activation_name(Activation a);

/// relu/tanh/sigmoid elementwise; softmax over the trailing axis.
Var activation(Tape& tape, Activation kind, Var x);

/// A length-T sequence of F-dimensional steps stored as a [T x F] tensor.
///
/// Batched layer code works on [batch x (T * F)] rows, step-major. A tabular
/// record of F features is read as T = F steps of one channel, which is the
/// same memory layout as the record itself, so no copy is needed.
class SequenceView {
 public:
  explicit SequenceView(Tensor steps_by_features);
  std::size_t steps() const noexcept { return data_.shape()[0]; }
  std::size_t features() const noexcept { return data_.shape()[1]; }
  const Tensor& tensor() const noexcept { return data_; }
  /// The same values as a single batch row [1 x T*F].
  Tensor as_batch_row() const;
  static SequenceView from_record(std::span<const double> features);

 private:
  Tensor data_;
};

struct SequenceShape {
  std::size_t steps = 0;
  std::size_t channels = 0;
};

// ---------------------------------------------------------------------------
// Parameter blocks (handles to values on a tape).

/// W [in x out], b [out]
struct DenseParams {
  Var weight;
  Var bias;
};

/// kernels [out_ch x in_ch x k], b [out_ch]
struct Conv1dParams {
  Var kernels;
  Var bias;
};

enum class CellKind { rnn, lstm, gru };

std::string_view cell_name(CellKind kind);
/// Number of gate blocks stacked column-wise in the weight matrices.
std::size_t gate_count(CellKind kind);

/// Input weights [in x G*h], recurrent weights [h x G*h], bias [G*h] where G is
/// the gate count. Gate blocks are laid out left to right as
///   lstm: input, forget, cell candidate, output
///   gru:  update (z), reset (r), candidate
///   rnn:  a single block
struct RecurrentParams {
  Var input_weights;
  Var recurrent_weights;
  Var bias;
};

/// Shapes of the trainable tensors for each layer kind, in storage order.
std::vector<Shape> dense_param_shapes(std::size_t in, std::size_t out);
std::vector<Shape> conv1d_param_shapes(std::size_t in_channels, std::size_t out_channels, std::size_t kernel);
std::vector<Shape> recurrent_param_shapes(CellKind kind, std::size_t in, std::size_t hidden);

// ---------------------------------------------------------------------------
// Forward computations. All are differentiable end to end.

/// act(x * W + b); x [batch x in]. Without an activation the affine map is returned.
Var dense_forward(Tape& tape, Var x, const DenseParams& p, std::optional<Activation> act);

/// x [batch x T*C_in] -> [batch x T'*C_out].
Var conv1d_forward(Tape& tape, Var x, SequenceShape shape, const Conv1dParams& p, std::size_t stride,
                   std::size_t padding);

struct RecurrentOutput {
  /// [batch x T*h]; block t holds the state after step t, in step order
  /// even when the sequence was walked in reverse.
  Var sequence;
  Var last_h;  // state after the last processed step
  Var last_c;  // lstm only
};

struct RecurrentOptions {
  std::optional<Var> h0;  // [h] or [batch x h]; zeros when absent
  std::optional<Var> c0;  // lstm only
  /// Activation used where the textbook cell uses tanh (rnn state, lstm
  /// candidate and cell output, gru candidate).
  Activation activation = Activation::tanh;
  /// Walk the steps from last to first.
  bool reverse = false;
};

/// h_t = act(x_t Wx + h_{t-1} Wh + b)
RecurrentOutput rnn_forward(Tape& tape, Var x, SequenceShape shape, const RecurrentParams& p,
                            const RecurrentOptions& opts = {});

/// i, f, o = sigmoid(.), g = act(.), c_t = f * c_{t-1} + i * g, h_t = o * act(c_t)
RecurrentOutput lstm_forward(Tape& tape, Var x, SequenceShape shape, const RecurrentParams& p,
                             const RecurrentOptions& opts = {});

/// z, r = sigmoid(.), h~ = act(x_t Wx + (r * h_{t-1}) Wh + b),
/// h_t = (1 - z) * h_{t-1} + z * h~
RecurrentOutput gru_forward(Tape& tape, Var x, SequenceShape shape, const RecurrentParams& p,
                            const RecurrentOptions& opts = {});

/// Each call records one tape node with a hand-written backward pass through
/// time, so tape size does not grow with T.
RecurrentOutput recurrent_forward(Tape& tape, CellKind kind, Var x, SequenceShape shape, const RecurrentParams& p,
                                  const RecurrentOptions& opts = {});

/// a, b [batch x T*w] -> [batch x T*2w] with step t = [a_t | b_t].
Var interleave_steps(Tape& tape, Var a, Var b, std::size_t steps);

enum class BidirectionalMode { final_state, per_step };

/// Runs the cell forward over x and backward over reversed x.
/// final_state: [batch x 2h] = [h_fwd_T | h_bwd_T].
/// per_step:    [batch x T*2h], step t holding [h_fwd_t | h_bwd_t] with the
///              backward states re-reversed into step order.
Var bidirectional(Tape& tape, CellKind kind, Var x, SequenceShape shape, const RecurrentParams& forward,
                  const RecurrentParams& backward, BidirectionalMode mode = BidirectionalMode::final_state,
                  Activation act = Activation::tanh);

/// Mean over the batch of -sum(target * log(pred + 1e-12)). Each pred row must
/// sum to 1 within 1e-6 and each target row must be one-hot.
Var cross_entropy(Tape& tape, Var pred, Var target);

/// Mean over the batch of -(y log(p + 1e-12) + (1 - y) log(1 - p + 1e-12)) for
/// p, y of shape [batch x 1]; y must be 0 or 1.
Var binary_cross_entropy(Tape& tape, Var pred, Var target);

}  // namespace botstack
