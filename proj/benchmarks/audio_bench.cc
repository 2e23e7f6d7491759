// benchmarks/audio_bench.cc

// Copyright 2026  The corpusforge Authors

// See the LICENSE file at the top of the source tree.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include <benchmark/benchmark.h>

#include "corpusforge/audio.h"
#include "test_util.h"

namespace corpusforge {
namespace {

// One tone burst every few seconds over the requested length in minutes.
AudioBuffer long_recording(double minutes) {
  std::vector<std::pair<double, double>> bursts;
  for (double t = 1.0; t + 3.0 < minutes * 60.0; t += 4.5) bursts.push_back({t, t + 3.0});
  return testing::tone_bursts(minutes * 60.0, bursts, 0.1);
}

void BM_EnergyVad(benchmark::State& state) {
  const auto buffer = long_recording(static_cast<double>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(energy_vad(buffer));
  state.SetBytesProcessed(state.iterations() *
                          static_cast<std::int64_t>(buffer.samples.size() * sizeof(float)));
}
BENCHMARK(BM_EnergyVad)->Arg(1)->Arg(10)->Unit(benchmark::kMillisecond);

void BM_Slice(benchmark::State& state) {
  const auto buffer = long_recording(10.0);
  for (auto _ : state) benchmark::DoNotOptimize(slice(buffer, 120.0, 140.0));
}
BENCHMARK(BM_Slice);

}  // namespace
}  // namespace corpusforge
