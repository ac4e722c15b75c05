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


#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "ctcalib/geometry.h"
#include "ctcalib/trajectory.h"

namespace ctcalib {
namespace {

std::vector<Twist> RandomTwists(int n) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Twist> out(n);
  for (auto& xi : out) {
    for (int i = 0; i < 6; ++i) xi(i) = u(rng);
  }
  return out;
}

void BM_ExpMap(benchmark::State& state) {
  const auto twists = RandomTwists(256);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(ExpMap(twists[i++ & 255]));
  }
}
BENCHMARK(BM_ExpMap);

void BM_LogMap(benchmark::State& state) {
  std::vector<Pose> poses;
  for (const auto& xi : RandomTwists(256)) poses.push_back(ExpMap(xi));
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(LogMap(poses[i++ & 255]));
  }
}
BENCHMARK(BM_LogMap);

void BM_Interpolate(benchmark::State& state) {
  std::vector<StampedPose> knots;
  Pose pose;
  for (const auto& xi : RandomTwists(static_cast<int>(state.range(0)))) {
    knots.push_back({0.01 * static_cast<double>(knots.size()), pose});
    pose = pose * ExpMap(0.05 * xi);
  }
  const ContinuousTrajectory trajectory(knots);
  const double span = trajectory.end_time() - trajectory.start_time();
  double t = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(trajectory.Interpolate(t));
    t += 0.0137;
    if (t > span) t -= span;
  }
}
BENCHMARK(BM_Interpolate)->Arg(100)->Arg(10000);

}  // namespace
}  // namespace ctcalib
