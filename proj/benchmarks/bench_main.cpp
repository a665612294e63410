// Copyright 2026 The AirComp Toolkit Authors
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

#include "aircomp/ao_solver.hpp"
#include "aircomp/baselines.hpp"
#include "aircomp/closed_form.hpp"
#include "aircomp/sca.hpp"
#include "aircomp/trainer.hpp"
#include "aircomp/udgl.hpp"

namespace aircomp {
namespace {

NetworkRealization scenario(std::size_t k) { return generate_realization(ScenarioConfig::uniform(k, 5, 8), 7, 0); }

void BM_ReceiveBeamformers(benchmark::State& state) {
  const NetworkRealization r = scenario(static_cast<std::size_t>(state.range(0)));
  const auto u = full_power_scalars(r);
  for (auto _ : state) benchmark::DoNotOptimize(optimal_receive_beamformers(u, r));
}
BENCHMARK(BM_ReceiveBeamformers)->Arg(2)->Arg(5)->Arg(8);

void BM_TransmitSubproblem(benchmark::State& state) {
  const NetworkRealization r = scenario(static_cast<std::size_t>(state.range(0)));
  const auto init = random_initial_strategy(r, 1);
  const TransmitSubproblem sub(r, init.v);
  std::vector<double> t;
  for (double m : sub.mse(init.u)) t.push_back(1.0 / m);
  for (auto _ : state) benchmark::DoNotOptimize(sub.solve(init.u, t));
}
BENCHMARK(BM_TransmitSubproblem)->Arg(2)->Arg(5)->Unit(benchmark::kMillisecond);

void BM_AlternatingOptimization(benchmark::State& state) {
  const NetworkRealization r = scenario(static_cast<std::size_t>(state.range(0)));
  const auto init = random_initial_strategy(r, 1);
  for (auto _ : state) benchmark::DoNotOptimize(alternating_optimize(r, init));
}
BENCHMARK(BM_AlternatingOptimization)->Arg(2)->Arg(5)->Unit(benchmark::kMillisecond);

void BM_Baselines(benchmark::State& state) {
  const NetworkRealization r = scenario(5);
  for (auto _ : state) {
    benchmark::DoNotOptimize(fpt_strategy(r));
    benchmark::DoNotOptimize(apt_strategy(r));
  }
}
BENCHMARK(BM_Baselines);

void BM_UdglForward(benchmark::State& state) {
  const NetworkRealization r = scenario(static_cast<std::size_t>(state.range(0)));
  const UdglModel model(UdglConfig{}, 1);
  for (auto _ : state) benchmark::DoNotOptimize(udgl_forward(model, r));
}
BENCHMARK(BM_UdglForward)->Arg(2)->Arg(5)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_TinyBatchGradient(benchmark::State& state) {
  std::vector<NetworkRealization> batch;
  for (std::uint64_t i = 0; i < 32; ++i) batch.push_back(generate_realization(ScenarioConfig::uniform(2, 2, 2), 3, i));
  const UdglModel model(UdglConfig::tiny(), 1);
  for (auto _ : state) benchmark::DoNotOptimize(batch_loss(model, batch, 1, true));
}
BENCHMARK(BM_TinyBatchGradient)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace aircomp

BENCHMARK_MAIN();
