// Copyright (c) 2026, The posereg Authors. All rights reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <benchmark/benchmark.h>

#include "posereg/network.hpp"
#include "posereg/rng.hpp"
#include "posereg/training.hpp"

namespace {

using namespace posereg;

Tensor<float> random_batch(const NetworkConfig& net, std::size_t n, std::uint64_t seed) {
  Shape shape = net.input_shape();
  shape.insert(shape.begin(), n);
  Tensor<float> t(shape);
  Rng rng(seed);
  for (float& v : t) v = static_cast<float>(rng.uniform(-1.0, 1.0));
  return t;
}

void BM_Forward(benchmark::State& state, const char* preset) {
  const NetworkConfig net = NetworkConfig::preset(preset);
  const auto params = init_parameters<float>(net, 1);
  const auto batch = random_batch(net, static_cast<std::size_t>(state.range(0)), 2);
  for (auto _ : state) benchmark::DoNotOptimize(predict(params, batch));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

// One SGD step: forward, loss gradient, backward, momentum update.
void BM_TrainStep(benchmark::State& state) {
  const NetworkConfig net = NetworkConfig::preset("desk-64");
  auto params = init_parameters<float>(net, 1);
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto batch = random_batch(net, n, 2);
  Tensor<float> gt(Shape{n, kPoseDim}, 0.5f);
  Tensor<float> w(Shape{n, kPoseDim}, 1.0f);
  auto opt = OptimizerState<float>::for_params(params, 1e-2, 0.9);
  ForwardCache<float> cache;
  Tensor<float> grad;
  for (auto _ : state) {
    const auto& out = forward(params, batch, cache);
    benchmark::DoNotOptimize(batch_loss<float>(out, gt, w, &grad));
    const auto g = backward(params, cache, grad, false);
    sgd_momentum_step(params, g.layers, opt);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK_CAPTURE(BM_Forward, desk64, "desk-64")->Arg(1)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Forward, paper224, "paper-224")->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_TrainStep)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
