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
#include <map>
#include <random>

#include <gtest/gtest.h>

#include "ctcalib/error.h"
#include "ctcalib/reprojection.h"
#include "ctcalib/sim.h"
#include "test_util.h"

namespace ctcalib {
namespace {

Eigen::Vector2d Residual(const CalibrationState& s, double t,
                         const Eigen::Vector2d& px, const Eigen::Vector3d& p,
                         const SimulatedDataset& d) {
  return ReprojectionResidual(s, t, px, p, d.lidar, d.intrinsics).residual;
}

double RelativeError(const Eigen::MatrixXd& analytic,
                     const Eigen::MatrixXd& numeric) {
  return (analytic - numeric).norm() / std::max(numeric.norm(), 1e-12);
}

TEST(ReprojectionTest, OpticalAxisIsZero) {
  std::vector<StampedPose> knots = {{0.0, Pose()}, {1.0, Pose()}};
  const ContinuousTrajectory lidar(knots);
  const CameraIntrinsics k;
  const auto r = ReprojectionResidual(Pose(), 0.0, 0.5, Eigen::Vector2d(k.cx, k.cy),
                                      Eigen::Vector3d(0, 0, 2), lidar, k);
  ASSERT_TRUE(r.valid);
  EXPECT_EQ(r.residual, Eigen::Vector2d::Zero());
  EXPECT_DOUBLE_EQ(r.depth, 2.0);
}

TEST(ReprojectionTest, BehindCameraIsInvalid) {
  const ContinuousTrajectory lidar({{0.0, Pose()}, {1.0, Pose()}});
  const auto r = ReprojectionResidual(Pose(), 0.0, 0.5, Eigen::Vector2d(1, 1),
                                      Eigen::Vector3d(0, 0, -2), lidar,
                                      CameraIntrinsics{});
  EXPECT_FALSE(r.valid);
}

TEST(ReprojectionTest, ShiftedTimeOutsideSpanIsOutOfRange) {
  const ContinuousTrajectory lidar({{0.0, Pose()}, {1.0, Pose()}});
  try {
    ReprojectionResidual(Pose(), 0.2, 0.9, Eigen::Vector2d(1, 1),
                         Eigen::Vector3d(0, 0, 2), lidar, CameraIntrinsics{});
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kOutOfRange);
  }
}

TEST(ReprojectionTest, GroundTruthZeroesResiduals) {
  Scenario s;
  s.pixel_noise = 0.0;
  s.time_lag = 0.037;
  s.seed = 31;
  const auto d = GenerateScenario(s);
  const auto truth =
      CalibrationState::FromLidarFromCamera(d.truth.extrinsic, d.truth.time_lag);
  double worst = 0.0;
  for (const auto& track : d.tracks) {
    for (const auto& obs : track.observations) {
      worst = std::max(worst, Residual(truth, d.frame_times.at(obs.frame_id),
                                       obs.pixel,
                                       d.landmarks[track.landmark_id], d)
                                  .norm());
    }
  }
  EXPECT_LT(worst, 1e-6);
}

TEST(ReprojectionTest, LagErrorGrowsAwayFromTruth) {
  Scenario s;
  s.pixel_noise = 0.0;
  s.seed = 32;
  const auto d = GenerateScenario(s);
  const auto& track = d.tracks.front();
  const auto& obs = track.observations[track.observations.size() / 2];
  const double t = d.frame_times.at(obs.frame_id);
  double previous = -1.0;
  for (double delta : {0.0, 0.002, 0.005, 0.01, 0.02}) {
    const auto state =
        CalibrationState::FromLidarFromCamera(d.truth.extrinsic, delta);
    const double norm =
        Residual(state, t, obs.pixel, d.landmarks[track.landmark_id], d).norm();
    if (delta == 0.0) {
      EXPECT_LT(norm, 1e-6);
    } else {
      EXPECT_GT(norm, previous);
    }
    previous = norm;
  }
}

// Central differences; xi is perturbed on the left, as in the update rule.
TEST(ReprojectionProperty, JacobiansMatchFiniteDifferences) {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  int checked = 0;
  double worst[3] = {0.0, 0.0, 0.0};
  for (int config = 0; checked < 100; ++config) {
    ASSERT_LT(config, 1000) << "too few usable configurations";
    Scenario s;
    s.seed = 100 + static_cast<std::uint64_t>(config % 10);
    s.pixel_noise = 0.0;
    s.duration = 4.0;
    static std::map<std::uint64_t, SimulatedDataset> cache;
    auto it = cache.find(s.seed);
    if (it == cache.end()) it = cache.emplace(s.seed, GenerateScenario(s)).first;
    const SimulatedDataset& d = it->second;

    Twist dx;
    dx << testing::RandomVector(rng, 0.05), testing::RandomVector(rng, 0.05);
    CalibrationState state = CalibrationState::FromLidarFromCamera(
        d.truth.extrinsic * ExpMap(dx), 0.02 * (unit(rng) - 0.5));
    const double t = 0.2 + 3.6 * unit(rng);
    // Keep clear of knots, where the time derivative jumps.
    const double knot_phase = std::fmod((t + state.tau) * s.lidar_rate + 100.0, 1.0);
    if (knot_phase < 0.05 || knot_phase > 0.95) continue;
    const auto& track = d.tracks[rng() % d.tracks.size()];
    const Eigen::Vector3d p =
        d.landmarks[track.landmark_id] + testing::RandomVector(rng, 0.3);
    const Pose cw = CameraPoseInWorld(state.camera_from_lidar(), state.tau, t,
                                      d.lidar);
    const Eigen::Vector3d pc = cw.inverse() * p;
    if (pc.z() < 1.0) continue;
    const Eigen::Vector2d px =
        d.intrinsics.Project(pc) + testing::RandomVector(rng, 5.0).head<2>();

    ResidualJacobians j;
    ASSERT_TRUE(ReprojectionResidual(state, t, px, p, d.lidar, d.intrinsics, &j)
                    .valid);

    Eigen::Matrix<double, 2, 6> fd_xi;
    const double hx = 1e-7;
    for (int a = 0; a < 6; ++a) {
      const Twist e = hx * Twist::Unit(a);
      CalibrationState plus = state, minus = state;
      plus.xi = LogMap(ExpMap(e) * ExpMap(state.xi));
      minus.xi = LogMap(ExpMap(-e) * ExpMap(state.xi));
      fd_xi.col(a) = (Residual(plus, t, px, p, d) - Residual(minus, t, px, p, d)) /
                     (2 * hx);
    }
    const double ht = 1e-6;
    CalibrationState plus = state, minus = state;
    plus.tau += ht;
    minus.tau -= ht;
    const Eigen::Vector2d fd_tau =
        (Residual(plus, t, px, p, d) - Residual(minus, t, px, p, d)) / (2 * ht);
    Eigen::Matrix<double, 2, 3> fd_p;
    const double hp = 1e-7;
    for (int a = 0; a < 3; ++a) {
      const Eigen::Vector3d e = hp * Eigen::Vector3d::Unit(a);
      fd_p.col(a) =
          (Residual(state, t, px, p + e, d) - Residual(state, t, px, p - e, d)) /
          (2 * hp);
    }
    worst[0] = std::max(worst[0], RelativeError(j.d_xi, fd_xi));
    worst[1] = std::max(worst[1], RelativeError(j.d_tau, fd_tau));
    worst[2] = std::max(worst[2], RelativeError(j.d_landmark, fd_p));
    ++checked;
  }
  EXPECT_LT(worst[0], 1e-4);
  EXPECT_LT(worst[1], 1e-4);
  EXPECT_LT(worst[2], 1e-4);
}

}  // namespace
}  // namespace ctcalib
