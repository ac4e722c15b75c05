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


#include <algorithm>
#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "ctcalib/refine.h"
#include "ctcalib/sim.h"

namespace ctcalib {
namespace {

CoarseResult GuessFrom(const GroundTruth& truth, const Twist& error, double tau) {
  CoarseResult guess;
  guess.extrinsic = truth.extrinsic * ExpMap(error);
  guess.time_offset = tau;
  guess.scale = truth.scale;
  return guess;
}

RefineResult RunRefine(const SimulatedDataset& d, const CoarseResult& guess,
                 const RefineConfig& config = {}) {
  return RefineCalibration(guess, d.camera_poses, d.tracks, d.frame_times,
                           d.lidar, d.intrinsics, config);
}

TEST(RefineTest, ExactStartIsImmediatelyConverged) {
  Scenario s;
  s.pixel_noise = 0.0;
  s.time_lag = 0.006;
  s.seed = 61;
  const auto d = GenerateScenario(s);
  const RefineResult r =
      RunRefine(d, GuessFrom(d.truth, Twist::Zero(), d.truth.time_lag));
  EXPECT_TRUE(r.converged);
  EXPECT_LE(r.iterations, 2);
  ASSERT_FALSE(r.cost_history.empty());
  EXPECT_LT(r.cost_history.back(), 1e-12);
  const ErrorMetrics m = Evaluate(r.extrinsic, r.tau, d.truth);
  EXPECT_LT(m.e_r, 1e-8);
  EXPECT_LT(m.e_t, 1e-8);
  EXPECT_LT(std::abs(m.e_tau), 1e-9);
}

std::vector<LandmarkObservations> TruthLandmarks(const SimulatedDataset& d) {
  std::vector<LandmarkObservations> landmarks;
  for (const auto& track : d.tracks) {
    LandmarkObservations lm;
    lm.landmark_id = track.landmark_id;
    lm.position = d.landmarks[track.landmark_id];
    for (const auto& obs : track.observations) {
      lm.observations.push_back({d.frame_times.at(obs.frame_id), obs.pixel});
    }
    landmarks.push_back(std::move(lm));
  }
  return landmarks;
}

// Observations regenerated through the residual model itself, so the
// residuals at truth are exactly zero.
TEST(RefineTest, GradientVanishesAtTruth) {
  Scenario s;
  s.pixel_noise = 0.0;
  s.time_lag = 0.004;
  s.seed = 62;
  const auto d = GenerateScenario(s);
  const auto truth =
      CalibrationState::FromLidarFromCamera(d.truth.extrinsic, d.truth.time_lag);
  auto landmarks = TruthLandmarks(d);
  for (auto& lm : landmarks) {
    for (auto& obs : lm.observations) {
      obs.pixel -= ReprojectionResidual(truth, obs.frame_time, obs.pixel,
                                        lm.position, d.lidar, d.intrinsics)
                       .residual;
    }
  }
  const auto ne = AssembleNormalEquations(truth, landmarks, d.lidar, d.intrinsics,
                                          RobustWeight{});
  EXPECT_LT(ne.DenseGradient().norm(), 1e-10);
  EXPECT_LT(MarginalizeLandmarks(ne).g.norm(), 1e-10);
}

// Simulated pixels carry double roundoff (about 1e-12 px), so the gradient is
// bounded by sum |J|^T |r| rather than zero.
TEST(RefineTest, GradientAtTruthWithinRoundoffBound) {
  Scenario s;
  s.pixel_noise = 0.0;
  s.time_lag = 0.004;
  s.seed = 62;
  const auto d = GenerateScenario(s);
  const auto truth =
      CalibrationState::FromLidarFromCamera(d.truth.extrinsic, d.truth.time_lag);
  const auto landmarks = TruthLandmarks(d);
  double bound = 0.0;
  double max_residual = 0.0;
  for (const auto& lm : landmarks) {
    for (const auto& obs : lm.observations) {
      ResidualJacobians jac;
      const auto r = ReprojectionResidual(truth, obs.frame_time, obs.pixel,
                                          lm.position, d.lidar, d.intrinsics, &jac);
      max_residual = std::max(max_residual, r.residual.norm());
      bound += jac.d_xi.cwiseAbs().sum() * r.residual.cwiseAbs().sum() +
               jac.d_tau.cwiseAbs().sum() * r.residual.cwiseAbs().sum();
    }
  }
  EXPECT_LT(max_residual, 1e-10);
  const auto ne = AssembleNormalEquations(truth, landmarks, d.lidar, d.intrinsics,
                                          RobustWeight{});
  EXPECT_LE(ne.g_c.norm(), bound);
  EXPECT_LT(ne.g_c.norm(), 1e-5);
}

TEST(RefineTest, RecoversFromPerturbedStart) {
  Scenario s;
  s.pixel_noise = 1.0;
  s.time_lag = 0.008;
  s.seed = 63;
  const auto d = GenerateScenario(s);
  Twist error;
  error << 0.03, -0.02, 0.04, 0.05, -0.03, 0.02;
  RefineConfig config;
  config.reinitialize_extrinsic = false;
  const RefineResult r = RunRefine(d, GuessFrom(d.truth, error, 0.0), config);
  const ErrorMetrics m = Evaluate(r.extrinsic, r.tau, d.truth);
  EXPECT_TRUE(r.converged);
  EXPECT_LT(m.e_r, 5e-3);
  EXPECT_LT(m.e_t, 0.03);
  EXPECT_LT(std::abs(m.e_tau), 1e-3);
  EXPECT_GT(r.inlier_ratio, 0.9);
  EXPECT_LT(r.mean_reprojection_error, 3.0);
  EXPECT_EQ(r.keyframe_count, config.keyframes);
}

TEST(RefineTest, AcceptedCostNeverIncreases) {
  for (std::uint64_t seed : {64u, 65u, 66u}) {
    Scenario s;
    s.seed = seed;
    s.time_lag = 0.005;
    const auto d = GenerateScenario(s);
    Twist error;
    error << 0.04, 0.03, -0.02, -0.05, 0.04, 0.03;
    const RefineResult r = RunRefine(d, GuessFrom(d.truth, error, 0.0));
    for (std::size_t i = 1; i < r.cost_history.size(); ++i) {
      EXPECT_LE(r.cost_history[i], r.cost_history[i - 1]) << "seed " << seed;
    }
    for (std::size_t i = 1; i < r.time_lag_cost_history.size(); ++i) {
      EXPECT_LE(r.time_lag_cost_history[i], r.time_lag_cost_history[i - 1]);
    }
  }
}

TEST(RefineTest, TimeLagOnlyKeepsExtrinsic) {
  Scenario s;
  s.pixel_noise = 1.0;
  s.time_lag = 0.03;
  s.seed = 67;
  const auto d = GenerateScenario(s);
  RefineConfig config;
  config.time_lag_only = true;
  const CoarseResult guess = GuessFrom(d.truth, Twist::Zero(), 0.0);
  const RefineResult r = RunRefine(d, guess, config);
  EXPECT_LT((r.extrinsic.matrix() - guess.extrinsic.matrix()).norm(), 1e-12);
  EXPECT_NEAR(r.tau, d.truth.time_lag, 2e-3);
  EXPECT_EQ(r.cost_history, r.time_lag_cost_history);
}

TEST(RefineProperty, TimeShiftEquivariance) {
  Scenario s;
  s.seed = 68;
  s.time_lag = 0.006;
  const auto d = GenerateScenario(s);
  Twist error;
  error << 0.02, -0.03, 0.01, 0.03, 0.02, -0.04;
  RefineConfig config;
  config.reinitialize_extrinsic = false;
  const CoarseResult guess = GuessFrom(d.truth, error, 0.0);
  const RefineResult base = RunRefine(d, guess, config);
  const double delta = 0.1;
  const ContinuousTrajectory shifted = d.lidar.TimeShifted(delta);
  CoarseResult shifted_guess = guess;
  shifted_guess.time_offset += delta;
  const RefineResult moved =
      RefineCalibration(shifted_guess, d.camera_poses, d.tracks, d.frame_times,
                        shifted, d.intrinsics, config);
  EXPECT_NEAR(moved.tau - base.tau, delta, 5e-4);
  EXPECT_LT(RotationDistance(moved.extrinsic.rotation(), base.extrinsic.rotation()),
            1e-4);
  EXPECT_LT((moved.extrinsic.translation() - base.extrinsic.translation()).norm(),
            1e-3);
}

TEST(SelectKeyframesTest, EvenlySpacedAndDistinct) {
  Scenario s;
  s.seed = 69;
  const auto d = GenerateScenario(s);
  const std::vector<int> keys =
      SelectKeyframes(d.tracks, d.frame_times, d.lidar, 0.0, 30);
  ASSERT_EQ(keys.size(), 30u);
  for (std::size_t i = 1; i < keys.size(); ++i) EXPECT_LT(keys[i - 1], keys[i]);
  const double span = d.frame_times.rbegin()->first;
  EXPECT_LE(keys.front(), span * 0.05);
  EXPECT_GE(keys.back(), span * 0.95);
}

}  // namespace
}  // namespace ctcalib
