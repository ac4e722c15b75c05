/*
 * Copyright 2026 The ctcalib Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


#include <vector>

#include <benchmark/benchmark.h>

#include "ctcalib/normal_equations.h"
#include "ctcalib/refine.h"
#include "ctcalib/sim.h"

namespace ctcalib {
namespace {

const SimulatedDataset& Dataset() {
  static const SimulatedDataset data = [] {
    Scenario scenario;
    scenario.duration = 6.0;
    scenario.time_lag = 0.005;
    scenario.seed = 11;
    return GenerateScenario(scenario);
  }();
  return data;
}

std::vector<LandmarkObservations> TruthLandmarks(const SimulatedDataset& data) {
  std::vector<LandmarkObservations> out;
  for (const auto& track : data.tracks) {
    LandmarkObservations lm;
    lm.landmark_id = track.landmark_id;
    lm.position = data.landmarks[track.landmark_id];
    for (const auto& obs : track.observations) {
      lm.observations.push_back({data.frame_times.at(obs.frame_id), obs.pixel});
    }
    out.push_back(std::move(lm));
  }
  return out;
}

void BM_AssembleAndSolve(benchmark::State& state) {
  const auto& data = Dataset();
  const auto landmarks = TruthLandmarks(data);
  const auto truth =
      CalibrationState::FromLidarFromCamera(data.truth.extrinsic, 0.0);
  for (auto _ : state) {
    const auto system = AssembleNormalEquations(truth, landmarks, data.lidar,
                                                data.intrinsics, {});
    benchmark::DoNotOptimize(SchurSolve(system, 1e-6));
  }
  state.counters["landmarks"] = static_cast<double>(landmarks.size());
}
BENCHMARK(BM_AssembleAndSolve)->Unit(benchmark::kMillisecond);

void BM_RefineCalibration(benchmark::State& state) {
  const auto& data = Dataset();
  CoarseResult initial;
  initial.extrinsic =
      data.truth.extrinsic * ExpMap((Twist() << 0.02, -0.01, 0.015, 0.03,
                                     0.02, -0.02).finished());
  RefineConfig config;
  config.keyframes = static_cast<int>(state.range(0));
  config.reinitialize_extrinsic = false;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        RefineCalibration(initial, data.camera_poses, data.tracks,
                          data.frame_times, data.lidar, data.intrinsics,
                          config));
  }
}
BENCHMARK(BM_RefineCalibration)->Arg(10)->Arg(30)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace ctcalib
