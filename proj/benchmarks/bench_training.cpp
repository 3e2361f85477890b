#include <benchmark/benchmark.h>

#include <random>
#include <string>

#include "botstack/model.hpp"
#include "botstack/pipeline.hpp"
#include "botstack/presets.hpp"
#include "botstack/runtime.hpp"
#include "botstack/train.hpp"

using namespace botstack;

namespace {

// Fixture-sized binary data: 980 rows of 55 features.
EncodedMatrix rows(std::size_t n, std::size_t f) {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> g(0.0, 1.0);
  EncodedMatrix m;
  m.x = Tensor({n, f});
  m.classes.resize(n);
  m.origin.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    m.classes[i] = static_cast<int>(i % 2);
    m.origin[i] = i;
    for (std::size_t j = 0; j < f; ++j) m.x.set(i, j, g(rng) + (m.classes[i] ? 0.5 : -0.5));
  }
  for (std::size_t j = 0; j < f; ++j) m.feature_names.push_back("f" + std::to_string(j));
  m.targets = make_targets(m.classes, LabelMode::binary, 2);
  return m;
}

// One epoch of a preset on fixture-sized data.
void BM_Epoch(benchmark::State& state, const char* name) {
  tune_allocator();
  const EncodedMatrix data = rows(980, 55);
  ModelConfig c = preset(name, LabelMode::binary, 42);
  c.epochs = 1;
  for (auto _ : state) {
    Model m(c, data.features());
    const TrainReport r = train(m, data);
    benchmark::DoNotOptimize(r.checksum);
  }
}
BENCHMARK_CAPTURE(BM_Epoch, ann, "ann-adagrad-20")->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Epoch, cnn, "cnn-adagrad-30")->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Epoch, lstm, "lstm-rmsprop-30")->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Epoch, rnn, "rnn-rmsprop-25")->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
