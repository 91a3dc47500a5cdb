// Copyright 2026 The fairreg Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <string>
#include <vector>

#include "benchmark/benchmark.h"
#include "fairreg/bounds.hpp"
#include "fairreg/data.hpp"
#include "fairreg/metrics.hpp"
#include "fairreg/nn.hpp"
#include "fairreg/rng.hpp"
#include "fairreg/train.hpp"

namespace fairreg {
namespace {

Matrix random_batch(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  Rng rng(seed);
  Matrix m(rows, cols);
  for (double& v : m.values()) v = rng.normal();
  return m;
}

void BM_ForwardBackward(benchmark::State& state) {
  const std::size_t batch = static_cast<std::size_t>(state.range(0));
  const std::vector<std::size_t> hidden = {60, 60};
  Rng rng(1);
  const LayerStack net = make_stack(20, hidden, 1, Activation::kReLU, Activation::kIdentity, rng);
  const Matrix x = random_batch(batch, 20, 2);
  const Matrix r = random_batch(batch, 1, 3);
  for (auto _ : state) {
    const ForwardResult fr = forward(net, x);
    benchmark::DoNotOptimize(backward(net, fr.cache, r));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(batch));
}
BENCHMARK(BM_ForwardBackward)->Arg(32)->Arg(256)->Arg(1024);

void BM_Wasserstein1d(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  Rng rng(7);
  Vector p(n), q(n + n / 3);
  for (double& v : p) v = rng.normal();
  for (double& v : q) v = rng.normal() + 0.5;
  for (auto _ : state) benchmark::DoNotOptimize(wasserstein1d_exact(p, q));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Wasserstein1d)->Range(1 << 8, 1 << 16)->Complexity(benchmark::oNLogN);

void BM_EvaluatePredictions(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  Rng rng(11);
  Vector pred(n), target(n);
  std::vector<int> group(n);
  for (std::size_t i = 0; i < n; ++i) {
    group[i] = i % 3 == 0 ? 1 : 0;
    target[i] = rng.normal() + group[i];
    pred[i] = target[i] + 0.3 * rng.normal();
  }
  const GroupedPredictions gp(pred, target, group);
  for (auto _ : state) benchmark::DoNotOptimize(evaluate_predictions(gp));
}
BENCHMARK(BM_EvaluatePredictions)->Arg(1000)->Arg(45000);

void BM_TrainEpoch(benchmark::State& state) {
  SyntheticSpec spec;
  spec.n0 = spec.n1 = 2000;
  spec.noise_proxy_shift = 1.0;
  const auto [tr, te] = split(gen_synthetic(spec), 0.3, 0);
  RunConfig c;
  c.algorithm = static_cast<Algorithm>(state.range(0));
  c.lambda = 1.0;
  c.epochs = 1;
  c.batch_size = 256;
  c.architecture.head_output = Activation::kIdentity;
  for (auto _ : state) benchmark::DoNotOptimize(train(c, tr, te));
  state.SetLabel(std::string(to_string(c.algorithm)));
}
BENCHMARK(BM_TrainEpoch)->DenseRange(0, 2)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace fairreg

BENCHMARK_MAIN();
