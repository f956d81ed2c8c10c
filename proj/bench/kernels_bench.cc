// Copyright 2026 The nvreadout Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <benchmark/benchmark.h>
#include <omp.h>

#include "nvreadout/monte_carlo.h"
#include "nvreadout/protocol_optimizer.h"

namespace nvreadout {
namespace {

const std::vector<PulseSegment> kReadout = {{0.42, 0.02, 0.01, 3.37, 0.15, true},
                                            {3.0, 0.02, 0.01, 3.37, 0.15, true}};

SccParams ReferenceScc() {
  SccParams p;
  p.p_ion = 0.005;
  p.k35 = 0.033;
  p.k45 = 0.25;
  p.p_sing = 0.32;
  p.k51_over_k52 = 2.26;
  p.spin_init = 0.85;
  p.charge_init_nv0 = 0.04;
  return p;
}

CountRateModel ReferenceCountModel() {
  CountRateModel m;
  m.bg_slope_kcps = 1.0;
  m.bg_slope_kcps = CalibrateBgSlope(m, 3000.0, 0.15);
  return m;
}

void BM_SequenceSerial(benchmark::State& state) {
  const TrajectoryConfig config{1, state.range(0)};
  for (auto _ : state) {
    benchmark::DoNotOptimize(RunSequenceSerial(kReadout, ChargePopulation::FromMinus(0.7), config));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_SequenceParallel(benchmark::State& state) {
  omp_set_num_threads(static_cast<int>(state.range(1)));
  const TrajectoryConfig config{1, state.range(0)};
  for (auto _ : state) {
    benchmark::DoNotOptimize(RunSequence(kReadout, ChargePopulation::FromMinus(0.7), config));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_SccSerial(benchmark::State& state) {
  const TrajectoryConfig config{2, state.range(0)};
  for (auto _ : state) benchmark::DoNotOptimize(SimulateSccSerial(ReferenceScc(), 10, config));
  state.SetItemsProcessed(state.iterations() * state.range(0) * 2);
}

void BM_SccParallel(benchmark::State& state) {
  omp_set_num_threads(static_cast<int>(state.range(1)));
  const TrajectoryConfig config{2, state.range(0)};
  for (auto _ : state) benchmark::DoNotOptimize(SimulateScc(ReferenceScc(), 10, config));
  state.SetItemsProcessed(state.iterations() * state.range(0) * 2);
}

void BM_SpeedupSweepSerial(benchmark::State& state) {
  const auto grid = LogSpace(0.1, 1e4, static_cast<int>(state.range(0)));
  const CountRateModel model = ReferenceCountModel();
  for (auto _ : state) {
    benchmark::DoNotOptimize(SpeedupSweepSerial({0.80, 0.60}, model, PlReadout{}, 1.0, grid));
  }
}

void BM_SpeedupSweepParallel(benchmark::State& state) {
  omp_set_num_threads(static_cast<int>(state.range(1)));
  const auto grid = LogSpace(0.1, 1e4, static_cast<int>(state.range(0)));
  const CountRateModel model = ReferenceCountModel();
  for (auto _ : state) {
    benchmark::DoNotOptimize(SpeedupSweep({0.80, 0.60}, model, PlReadout{}, 1.0, grid));
  }
}

BENCHMARK(BM_SequenceSerial)->Arg(100000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SequenceParallel)->ArgsProduct({{100000}, {1, 2, 4, 8}})->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_SccSerial)->Arg(100000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SccParallel)->ArgsProduct({{100000}, {1, 2, 4, 8}})->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_SpeedupSweepSerial)->Arg(161)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SpeedupSweepParallel)->ArgsProduct({{161}, {1, 2, 4, 8}})->Unit(benchmark::kMillisecond)->UseRealTime();

}  // namespace
}  // namespace nvreadout

BENCHMARK_MAIN();
