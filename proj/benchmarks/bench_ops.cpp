#include <benchmark/benchmark.h>

#include "negres/autodiff.hpp"
#include "negres/model.hpp"
#include "negres/rng.hpp"
#include "negres/signal.hpp"
#include "negres/training.hpp"

using namespace negres;

namespace {

Tensor random_tensor(Shape shape, Rng& rng) {
  Tensor t(std::move(shape));
  for (double& v : t.values()) v = rng.uniform(-1.0, 1.0);
  return t;
}

// args: channels, kernel
void BM_Conv1dForwardBackward(benchmark::State& state) {
  const auto c = static_cast<std::size_t>(state.range(0));
  const auto k = static_cast<std::size_t>(state.range(1));
  Rng rng(1);
  const Tensor x = random_tensor({32, c, 250}, rng);
  Parameter w("w", random_tensor({c, c, k}, rng));
  Parameter b("b", Tensor({c}));
  for (auto _ : state) {
    ad::Tape tape;
    auto out = ad::conv1d(tape, tape.constant(x), tape.parameter(w), tape.parameter(b),
                          {1, k / 2});
    tape.backward(ad::sum(tape, out));
    benchmark::DoNotOptimize(w.grad.data());
  }
  state.SetItemsProcessed(state.iterations() * 32);
}
BENCHMARK(BM_Conv1dForwardBackward)->Args({8, 9})->Args({32, 15})->Unit(benchmark::kMillisecond);

// args: base filters, kernel
void BM_TrainStep(benchmark::State& state) {
  Rng rng(2);
  model::Network net(model::NetworkSpec::scaled(static_cast<std::size_t>(state.range(0)),
                                                static_cast<std::size_t>(state.range(1))),
                     rng);
  train::Batch batch;
  batch.inputs = random_tensor({32, 1, 250}, rng);
  for (std::size_t i = 0; i < 32; ++i) batch.given.push_back(kAllLabels[i % 6]);
  ad::Sgd sgd(0.01);
  train::TrainConfig cfg;
  Rng dropout(3), labels(4);
  for (auto _ : state) {
    auto rep = train::combined_step(net, sgd, batch, cfg, true, dropout, labels);
    benchmark::DoNotOptimize(rep.total_loss);
  }
  state.SetItemsProcessed(state.iterations() * 32);
}
BENCHMARK(BM_TrainStep)->Args({8, 9})->Args({32, 15})->Unit(benchmark::kMillisecond);

void BM_DetectQrs(benchmark::State& state) {
  signal::SynthConfig cfg;
  cfg.seed = 5;
  const auto synth = signal::synth_ecg(cfg, 75, Label::N);
  for (auto _ : state) {
    auto peaks = signal::detect_qrs(synth.trace);
    benchmark::DoNotOptimize(peaks.data());
  }
  state.SetBytesProcessed(state.iterations() *
                          static_cast<std::int64_t>(synth.trace.samples.size() * sizeof(double)));
}
BENCHMARK(BM_DetectQrs)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
