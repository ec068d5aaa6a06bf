// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The rotequiv Authors

#include <benchmark/benchmark.h>

#include "rotequiv/model.hpp"

namespace {

using namespace rotequiv;

nn::NetworkConfig config_for(std::int64_t mode) {
  auto cfg = nn::NetworkConfig::defaults();
  nn::set_downsample_mode(cfg, mode == 0 ? nn::DownsampleMode::strict : nn::DownsampleMode::approx);
  return cfg;
}

void BM_ModelForward(benchmark::State& state) {
  Rng rng(1);
  nn::Model<float> model(config_for(state.range(0)), rng);
  const TensorF x = TensorF::randn({16, 1, 64, 64}, rng);
  ad::NoGradGuard guard;
  for (auto _ : state) benchmark::DoNotOptimize(model.forward(ad::Var<float>(x), false).class_logits);
  state.SetLabel(state.range(0) == 0 ? "strict" : "approx");
}
BENCHMARK(BM_ModelForward)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_TrainStep(benchmark::State& state) {
  Rng rng(2);
  nn::Model<float> model(config_for(state.range(0)), rng);
  const TensorF x = TensorF::randn({16, 1, 64, 64}, rng);
  const std::vector<int> labels(16, 1);
  for (auto _ : state) {
    auto reg = model.registry();
    for (auto& p : reg.params) p.var.zero_grad();
    const auto out = model.forward(ad::Var<float>(x), true);
    ad::backward(ad::cross_entropy(out.class_logits, labels));
  }
  state.SetLabel(state.range(0) == 0 ? "strict" : "approx");
}
BENCHMARK(BM_TrainStep)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace
