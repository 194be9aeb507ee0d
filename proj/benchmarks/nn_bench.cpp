// Copyright 2026 The ProbeWeight Authors
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

#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "probeweight/nn.hpp"

namespace pw = probeweight;

namespace {

struct Batch {
  pw::nn::ClassifierParams params;
  pw::Matrix x;
  std::vector<pw::ClassId> y;
};

// width -> width x 3 -> 10, batch 128.
Batch make_batch(pw::Index width) {
  const std::vector<pw::Index> hidden(3, width);
  Batch b;
  b.params = pw::nn::init_classifier(pw::nn::ParamLayout::dense(width, hidden, 10), 1);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  b.x = pw::Matrix::NullaryExpr(128, width, [&] { return u(rng); });
  b.y.resize(128);
  for (auto& label : b.y) label = static_cast<pw::ClassId>(rng() % 10);
  return b;
}

void BM_Forward(benchmark::State& state) {
  const auto b = make_batch(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(pw::nn::forward_logits(b.params, b.x));
}
BENCHMARK(BM_Forward)->Arg(64)->Arg(256);

void BM_WeightedGrad(benchmark::State& state) {
  const auto b = make_batch(state.range(0));
  const pw::Vector w = pw::Vector::Ones(128);
  for (auto _ : state) benchmark::DoNotOptimize(pw::nn::weighted_grad(b.params, b.x, b.y, w));
}
BENCHMARK(BM_WeightedGrad)->Arg(64)->Arg(256);

void BM_PerSampleGradDots(benchmark::State& state) {
  const auto b = make_batch(256);
  const auto g = pw::nn::weighted_grad(b.params, b.x, b.y, pw::Vector::Ones(128));
  const int skip = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(pw::nn::per_sample_grad_dots(b.params, b.x, b.y, g, skip));
  }
}
BENCHMARK(BM_PerSampleGradDots)->DenseRange(0, 3);

}  // namespace

BENCHMARK_MAIN();
