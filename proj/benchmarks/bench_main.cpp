// Copyright (c) 2026, The deepnrc Authors
// SPDX-License-Identifier: Apache-2.0

#include "deepnrc/data.hpp"
#include "deepnrc/linalg.hpp"
#include "deepnrc/nn.hpp"
#include "deepnrc/nrc.hpp"

#include <benchmark/benchmark.h>

namespace {

using namespace deepnrc;

void BM_Svd(benchmark::State& state) {
  const auto n = static_cast<linalg::Index>(state.range(0));
  const auto h = static_cast<linalg::Index>(state.range(1));
  const auto m = data::gaussian_inputs(n, h, 1);
  for (auto _ : state) benchmark::DoNotOptimize(linalg::svd(m));
}
BENCHMARK(BM_Svd)->Args({1000, 64})->Args({8000, 256})->Unit(benchmark::kMillisecond);

void BM_ForwardBackward(benchmark::State& state) {
  const auto batch = static_cast<linalg::Index>(state.range(0));
  const auto arch = nn::MlpArchitecture::uniform(20, 8, 256, 3);
  const auto params = nn::init_params(arch, 1, nn::InitScheme::torch_default);
  const auto x = data::gaussian_inputs(batch, 20, 2);
  const auto y = data::gaussian_inputs(batch, 3, 3);
  for (auto _ : state) benchmark::DoNotOptimize(nn::backward(params, x, y));
  state.SetItemsProcessed(state.iterations() * batch);
}
BENCHMARK(BM_ForwardBackward)->Arg(128)->Arg(1024)->Unit(benchmark::kMicrosecond);

void BM_FullReport(benchmark::State& state) {
  const auto n = static_cast<linalg::Index>(state.range(0));
  const auto arch = nn::MlpArchitecture::uniform(20, 8, 256, 3, Activation::tanh);
  const auto params = nn::init_params(arch, 1, nn::InitScheme::torch_default);
  const auto x = data::gaussian_inputs(n, 20, 2);
  const auto y = data::nonlinear_targets(x, 3, 10, 4, Activation::tanh);
  const auto trace = nn::forward_capture(params, x);
  const double mse = nn::mse_loss(trace.predictions, y);
  for (auto _ : state) {
    benchmark::DoNotOptimize(nrc::full_report(trace, params, y, nrc::MetricOptions{}, mse));
  }
}
BENCHMARK(BM_FullReport)->Arg(2000)->Arg(8000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
