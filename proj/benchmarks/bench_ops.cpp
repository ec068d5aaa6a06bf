// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The rotequiv Authors

#include <benchmark/benchmark.h>

#include "rotequiv/group.hpp"
#include "rotequiv/tensor.hpp"

namespace {

using namespace rotequiv;

void BM_Conv2d(benchmark::State& state) {
  const auto c = static_cast<std::size_t>(state.range(0));
  const auto s = static_cast<std::size_t>(state.range(1));
  Rng rng(1);
  const TensorF x = TensorF::randn({8, c, s, s}, rng);
  const TensorF w = TensorF::randn({c, c, 3, 3}, rng);
  for (auto _ : state) benchmark::DoNotOptimize(conv2d(x, w, ConvSpec{3, 1, 1, 1}));
  state.SetItemsProcessed(state.iterations() * 8 * static_cast<std::int64_t>(c * c * 9 * s * s));
}
BENCHMARK(BM_Conv2d)->Args({16, 32})->Args({64, 16})->Args({128, 8})->Unit(benchmark::kMillisecond);

void BM_ExpandGroup(benchmark::State& state) {
  const CyclicGroup g(static_cast<int>(state.range(0)));
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(2);
  const TensorF base = TensorF::randn({8, 8 * n, 3, 3}, rng);
  for (auto _ : state) benchmark::DoNotOptimize(expand_group(base, g));
}
BENCHMARK(BM_ExpandGroup)->Arg(4)->Arg(8)->Arg(16);

void BM_Rot90(benchmark::State& state) {
  Rng rng(3);
  const TensorF x = TensorF::randn({16, 32, 32, 32}, rng);
  for (auto _ : state) benchmark::DoNotOptimize(rot90(x, 1));
}
BENCHMARK(BM_Rot90);

}  // namespace
