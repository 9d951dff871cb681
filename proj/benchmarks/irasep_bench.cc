// Copyright 2026 The irasep Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <random>

#include <benchmark/benchmark.h>
#include <torch/torch.h>

#include "irasep/metrics.h"
#include "irasep/mixsim.h"
#include "irasep/model.h"

namespace irasep {
namespace {

void BM_SiSdr(benchmark::State& state) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> d;
  std::vector<double> a(state.range(0)), b(state.range(0));
  for (auto& x : a) x = d(rng);
  for (auto& x : b) x = d(rng);
  for (auto _ : state) benchmark::DoNotOptimize(SiSdr(a, b));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SiSdr)->Arg(8000)->Arg(32000);

void BM_SynthUtterance(benchmark::State& state) {
  const auto profile = MakeProfiles(1, 3)[0];
  uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(SynthUtterance(profile, 1.0, seed++));
}
BENCHMARK(BM_SynthUtterance)->Unit(benchmark::kMillisecond);

// Inference on one second of audio, full-size model; range = iterations.
void BM_ExtractFullModel(benchmark::State& state) {
  torch::manual_seed(0);
  SpeakerExtractor model(FullModelConfig(2, 0));
  model->eval();
  torch::NoGradGuard ng;
  const auto mix = torch::randn({1, 8000}) * 0.1;
  const auto ref = torch::randn({1, 8000}) * 0.1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(model->Forward(mix, ref, state.range(0)).final_estimate());
  }
}
BENCHMARK(BM_ExtractFullModel)->Arg(0)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace irasep

BENCHMARK_MAIN();
