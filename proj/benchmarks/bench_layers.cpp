#include <benchmark/benchmark.h>

#include <random>

#include "botstack/autodiff.hpp"
#include "botstack/layers.hpp"
#include "botstack/ops.hpp"

using namespace botstack;

namespace {

Tensor random(Shape shape, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  Tensor t(std::move(shape));
  for (double& v : t.data()) v = u(rng);
  return t;
}

struct Recurrent {
  std::size_t batch, steps, hidden;
  Tensor x, wx, wh, b;
  Recurrent(CellKind kind, std::size_t batch_, std::size_t steps_, std::size_t hidden_)
      : batch(batch_), steps(steps_), hidden(hidden_) {
    const auto s = recurrent_param_shapes(kind, 1, hidden);
    x = random({batch, steps}, 1);
    wx = random(s[0], 2);
    wh = random(s[1], 3);
    b = random(s[2], 4);
  }
};

void recurrent(benchmark::State& state, CellKind kind, bool backward) {
  const Recurrent r(kind, 128, static_cast<std::size_t>(state.range(0)), 64);
  for (auto _ : state) {
    Tape t;
    const Var x = t.constant(r.x);
    const RecurrentParams p{t.parameter(r.wx), t.parameter(r.wh), t.parameter(r.b)};
    const RecurrentOutput out = recurrent_forward(t, kind, x, {r.steps, 1}, p);
    if (backward) {
      const Gradients g = t.backward(sum(t, out.last_h));
      benchmark::DoNotOptimize(g[p.input_weights].data().data());
    } else {
      benchmark::DoNotOptimize(t.value(out.last_h).data().data());
    }
  }
  state.SetItemsProcessed(state.iterations() * 128);
}

void BM_LstmForward(benchmark::State& s) { recurrent(s, CellKind::lstm, false); }
void BM_LstmForwardBackward(benchmark::State& s) { recurrent(s, CellKind::lstm, true); }
void BM_GruForwardBackward(benchmark::State& s) { recurrent(s, CellKind::gru, true); }
void BM_RnnForwardBackward(benchmark::State& s) { recurrent(s, CellKind::rnn, true); }
BENCHMARK(BM_LstmForward)->Arg(55)->Arg(196);
BENCHMARK(BM_LstmForwardBackward)->Arg(55)->Arg(196);
BENCHMARK(BM_GruForwardBackward)->Arg(55);
BENCHMARK(BM_RnnForwardBackward)->Arg(55);

void BM_Conv1dForwardBackward(benchmark::State& state) {
  const std::size_t batch = 128, steps = static_cast<std::size_t>(state.range(0)), cin = 1, cout = 32, k = 3;
  const auto s = conv1d_param_shapes(cin, cout, k);
  const Tensor x = random({batch, steps * cin}, 5), w = random(s[0], 6), b = random(s[1], 7);
  for (auto _ : state) {
    Tape t;
    const Conv1dParams p{t.parameter(w), t.parameter(b)};
    const Var y = conv1d_forward(t, t.constant(x), {steps, cin}, p, 1, 1);
    const Gradients g = t.backward(sum(t, y));
    benchmark::DoNotOptimize(g[p.kernels].data().data());
  }
}
BENCHMARK(BM_Conv1dForwardBackward)->Arg(55)->Arg(196);

}  // namespace

BENCHMARK_MAIN();
