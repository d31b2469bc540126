/* Copyright 2026 The DHR Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include <benchmark/benchmark.h>

#include "dhr/pipeline.hpp"
#include "dhr/random.hpp"
#include "dhr/sinkhorn.hpp"
#include "dhr/synth.hpp"

namespace {

void BM_EntropicOt(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto c = static_cast<std::size_t>(state.range(1));
  dhr::Rng rng(7, n * 131 + c, "bench-ot");
  dhr::DenseMatrix s(n, c);
  for (double& v : s.values) v = rng.uniform();
  const dhr::OtConfig cfg;
  int iterations = 0;
  for (auto _ : state) {
    const dhr::TransportPlan plan = dhr::solve_entropic_ot(s, cfg);
    iterations = plan.iterations;
    benchmark::DoNotOptimize(plan.plan.values.data());
  }
  state.counters["sinkhorn_iters"] = iterations;
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * c));
}
BENCHMARK(BM_EntropicOt)
    ->Args({256, 21})
    ->Args({1024, 21})
    ->Args({4096, 21})
    ->Args({16384, 21})
    ->Unit(benchmark::kMillisecond);

void BM_PropagateScene(benchmark::State& state) {
  dhr::SynthConfig cfg;
  cfg.height = static_cast<std::size_t>(state.range(0));
  cfg.width = cfg.height;
  const dhr::SynthScene scene = dhr::generate_scene(cfg, 0);
  const dhr::DhrConfig dcfg;
  for (auto _ : state) {
    const dhr::DhrResult r = dhr::dhr_propagate(scene.bundle, dcfg);
    benchmark::DoNotOptimize(r.final_scores.data().data());
  }
}
BENCHMARK(BM_PropagateScene)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_GenerateScene(benchmark::State& state) {
  const dhr::SynthConfig cfg;
  std::uint64_t idx = 0;
  for (auto _ : state) {
    const dhr::SynthScene scene = dhr::generate_scene(cfg, idx++);
    benchmark::DoNotOptimize(scene.bundle.cams.data().data());
  }
}
BENCHMARK(BM_GenerateScene)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
