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


#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "ctcalib/coarse.h"
#include "ctcalib/error.h"
#include "ctcalib/sim.h"
#include "test_util.h"

namespace ctcalib {
namespace {

using testing::MaxAbsDiff;
using testing::RandomPose;
using testing::RandomVector;

ErrorCode CodeOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::kInvalidArgument;
}

// Camera motion implied by a LiDAR motion, extrinsic and scale: the camera
// translation is the metric one divided by `scale`.
RelativePosePair PairFor(const Pose& lidar_rel, const Pose& lidar_from_camera,
                         double scale) {
  const Pose metric = lidar_from_camera.inverse() * lidar_rel * lidar_from_camera;
  RelativePosePair pair;
  pair.lidar_rel = lidar_rel;
  pair.camera_rel = Pose(metric.rotation(), metric.translation() / scale);
  return pair;
}

std::vector<RelativePosePair> RandomPairs(std::mt19937_64& rng, int count,
                                          const Pose& extrinsic, double scale) {
  std::vector<RelativePosePair> pairs;
  for (int i = 0; i < count; ++i) {
    pairs.push_back(PairFor(RandomPose(rng, 1.0, 1.0), extrinsic, scale));
  }
  return pairs;
}

MotionSignal Step(double onset, double level) {
  MotionSignal s;
  for (int i = 0; i <= 60; ++i) {
    const double t = 0.1 * i;
    s.timestamps.push_back(t);
    s.magnitudes.push_back(t >= onset - 1e-9 ? level : 0.0);
  }
  return s;
}

TEST(MotionOnsetTest, StepFunction) {
  EXPECT_DOUBLE_EQ(DetectMotionOnset(Step(3.0, 10.0), 1.0, 3), 3.0);
}

TEST(MotionOnsetTest, AllZeroIsNotFound) {
  EXPECT_EQ(CodeOf([] { DetectMotionOnset(Step(100.0, 0.0), 1.0, 3); }),
            ErrorCode::kOnsetNotFound);
}

TEST(MotionOnsetTest, ShortSpikeIsIgnored) {
  MotionSignal s = Step(4.0, 10.0);
  s.magnitudes[10] = s.magnitudes[11] = 10.0;
  EXPECT_DOUBLE_EQ(DetectMotionOnset(s, 1.0, 3), 4.0);
}

TEST(MotionOnsetTest, NoisySimulatedOnset) {
  Scenario scenario;
  scenario.profile = TrajectoryProfile::kStationaryThenMove;
  scenario.duration = 8.0;
  scenario.seed = 21;
  const auto data = GenerateScenario(scenario);
  MotionSignal signal = LidarRotationalSpeed(data.lidar);
  double peak = 0.0;
  for (double m : signal.magnitudes) peak = std::max(peak, m);
  std::mt19937_64 rng(4);
  std::normal_distribution<double> noise(0.0, 0.1 * peak);
  for (double& m : signal.magnitudes) m = std::abs(m + noise(rng));
  // A threshold above the noise floor.
  const double onset = DetectMotionOnset(signal, 0.3 * peak, 5);
  EXPECT_NEAR(onset, scenario.onset_time, 0.1);
}

Scenario StationaryThenMove(double lag, std::uint64_t seed) {
  Scenario s;
  s.profile = TrajectoryProfile::kStationaryThenMove;
  s.duration = 8.0;
  s.time_lag = lag;
  s.pixel_noise = 0.0;
  s.seed = seed;
  return s;
}

TEST(RoughSyncTest, RecoversInjectedOffset) {
  const auto data = GenerateScenario(StationaryThenMove(0.4, 3));
  const double offset = RoughSync(
      data.lidar, FeatureMotion(data.tracks, data.frame_times));
  EXPECT_NEAR(offset, 0.4, 0.1);
}

TEST(RoughSyncTest, ZeroOffset) {
  const auto data = GenerateScenario(StationaryThenMove(0.0, 4));
  const double offset = RoughSync(
      data.lidar, FeatureMotion(data.tracks, data.frame_times));
  EXPECT_LE(std::abs(offset), 0.1);
}

TEST(RoughSyncTest, StationaryIsError) {
  std::vector<StampedPose> knots;
  for (int i = 0; i < 100; ++i) knots.push_back({0.01 * i, Pose()});
  const ContinuousTrajectory still(knots);
  MotionSignal camera;
  for (int i = 0; i < 20; ++i) {
    camera.timestamps.push_back(0.05 * i);
    camera.magnitudes.push_back(0.0);
  }
  EXPECT_EQ(CodeOf([&] { RoughSync(still, camera); }),
            ErrorCode::kOnsetNotFound);
}

TEST(ExtractPairsTest, TenPosesGiveSeveralPairs) {
  Scenario s;
  s.seed = 5;
  s.rotation_amplitude = 30.0 * M_PI / 180.0;
  const auto data = GenerateScenario(s);
  std::vector<StampedPose> ten;
  for (std::size_t i = 0; i < 10; ++i) {
    ten.push_back(data.camera_poses[i * (data.camera_poses.size() - 1) / 9]);
  }
  const auto pairs = ExtractPairs(data.lidar, ten, 10, 0.1, s.time_lag);
  EXPECT_GE(pairs.size(), 4u);
  for (const auto& p : pairs) {
    EXPECT_GE(p.lidar_rel.rotation().angle(), 0.1);
    EXPECT_GE(p.camera_rel.rotation().angle(), 0.1);
    EXPECT_LT(p.t_begin, p.t_end);
  }
  for (std::size_t i = 1; i < pairs.size(); ++i) {
    EXPECT_LE(pairs[i - 1].t_end, pairs[i].t_begin);  // non-nested
  }
}

TEST(ExtractPairsTest, PureTranslationIsInsufficient) {
  std::vector<StampedPose> knots, camera;
  for (int i = 0; i <= 100; ++i) {
    const Pose p(Rotation(), Eigen::Vector3d(0.05 * i, 0.0, 0.0));
    knots.push_back({0.01 * i, p});
    if (i % 10 == 0) camera.push_back({0.01 * i, p});
  }
  const ContinuousTrajectory lidar(knots);
  EXPECT_EQ(CodeOf([&] { ExtractPairs(lidar, camera, 10, 0.1); }),
            ErrorCode::kInsufficientExcitation);
}

TEST(SolveRotationTest, OrthogonalAxesZeroNoise) {
  const Pose x(Rotation::Exp(Eigen::Vector3d(0.3, -1.1, 0.4)),
               Eigen::Vector3d(0.1, 0.2, 0.3));
  std::vector<RelativePosePair> pairs;
  for (int k = 0; k < 3; ++k) {
    pairs.push_back(PairFor(
        Pose(Rotation::Exp(0.5 * Eigen::Vector3d::Unit(k)), Eigen::Vector3d::Zero()),
        x, 1.0));
  }
  const auto solution = SolveRotation(pairs);
  EXPECT_LT(RotationDistance(solution.rotation, x.rotation()), 1e-9);
}

TEST(SolveRotationTest, SingleAxisIsDegenerate) {
  const Pose x(Rotation::Exp(Eigen::Vector3d(0.3, -1.1, 0.4)),
               Eigen::Vector3d::Zero());
  std::vector<RelativePosePair> pairs;
  for (double a : {0.2, 0.4, -0.3, 0.6}) {
    pairs.push_back(PairFor(
        Pose(Rotation::Exp(Eigen::Vector3d(0, 0, a)), Eigen::Vector3d(a, 0, 0)),
        x, 1.0));
  }
  EXPECT_EQ(CodeOf([&] { SolveRotation(pairs); }), ErrorCode::kDegenerateMotion);
}

TEST(SolveRotationTest, NoisyOutputIsRotation) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 100; ++trial) {
    const Pose x = RandomPose(rng);
    auto pairs = RandomPairs(rng, 5, x, 1.0);
    for (auto& p : pairs) {
      p.camera_rel = Pose(p.camera_rel.rotation() *
                              Rotation::Exp(RandomVector(rng, 0.05)),
                          p.camera_rel.translation());
    }
    const Eigen::Matrix3d r = SolveRotation(pairs).rotation.matrix();
    EXPECT_LT(MaxAbsDiff(r * r.transpose(), Eigen::Matrix3d::Identity()), 1e-9);
    EXPECT_NEAR(r.determinant(), 1.0, 1e-9);
  }
}

TEST(SolveRotationTest, NoisyErrorIsCentiradianScale) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> n(0.0, 0.01);
  double sum = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const Pose x(RandomPose(rng).rotation(), Eigen::Vector3d::Zero());
    std::vector<RelativePosePair> pairs;
    for (int i = 0; i < 10; ++i) {
      const Eigen::Vector3d axis = RandomVector(rng, 1.0).normalized();
      auto pair = PairFor(Pose(Rotation::Exp(axis * M_PI / 6), {0, 0, 0}), x, 1.0);
      pair.lidar_rel = Pose(Rotation::Exp(pair.lidar_rel.rotation().Log() +
                                          Eigen::Vector3d(n(rng), n(rng), n(rng))),
                            {0, 0, 0});
      pair.camera_rel = Pose(Rotation::Exp(pair.camera_rel.rotation().Log() +
                                           Eigen::Vector3d(n(rng), n(rng), n(rng))),
                             {0, 0, 0});
      pairs.push_back(pair);
    }
    sum += RotationDistance(SolveRotation(pairs).rotation, x.rotation());
  }
  const double mean = sum / 50;
  EXPECT_GT(mean, 1e-3);
  EXPECT_LT(mean, 5e-2);
}

TEST(SolveTranslationScaleTest, ZeroNoise) {
  std::mt19937_64 rng(8);
  const Pose x = RandomPose(rng, 3.0, 0.5);
  const auto pairs = RandomPairs(rng, 6, x, 1.7);
  const auto solution = SolveTranslationScale(pairs, x.rotation());
  EXPECT_LT((solution.translation - x.translation()).norm(), 1e-9);
  EXPECT_NEAR(solution.scale / 1.7, 1.0, 1e-9);
  EXPECT_GT(solution.conditioning, 0.0);
}

TEST(SolveTranslationScaleTest, PureRotationRigIsUnobservable) {
  // Camera at the LiDAR origin, LiDAR rotating in place: t_C = 0 everywhere.
  const Pose x(Rotation::Exp(Eigen::Vector3d(0.2, 0.1, 0.0)),
               Eigen::Vector3d::Zero());
  std::vector<RelativePosePair> pairs;
  for (int k = 0; k < 3; ++k) {
    pairs.push_back(PairFor(
        Pose(Rotation::Exp(0.4 * Eigen::Vector3d::Unit(k)), Eigen::Vector3d::Zero()),
        x, 1.0));
  }
  EXPECT_EQ(CodeOf([&] { SolveTranslationScale(pairs, x.rotation()); }),
            ErrorCode::kUnobservableTranslation);
}

TEST(SolveTranslationScaleTest, NegativeScaleIsError) {
  std::mt19937_64 rng(9);
  const Pose x = RandomPose(rng, 3.0, 0.5);
  auto pairs = RandomPairs(rng, 6, x, 1.0);
  for (auto& p : pairs) {
    p.camera_rel = Pose(p.camera_rel.rotation(), -p.camera_rel.translation());
  }
  // With flipped camera translations only a negative scale fits.
  EXPECT_EQ(CodeOf([&] { SolveTranslationScale(pairs, x.rotation()); }),
            ErrorCode::kScaleSign);
}

TEST(CoarseProperty, ZeroNoiseExactRecovery) {
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> scale(0.3, 3.0);
  for (int trial = 0; trial < 100; ++trial) {
    const Pose x = RandomPose(rng, 3.0, 1.0);
    const double lambda = scale(rng);
    const auto pairs = RandomPairs(rng, 3 + trial % 8, x, lambda);
    const Rotation r = SolveRotation(pairs).rotation;
    const auto ts = SolveTranslationScale(pairs, r);
    ASSERT_LT(RotationDistance(r, x.rotation()), 1e-8);
    ASSERT_LT((ts.translation - x.translation()).norm(), 1e-8);
    ASSERT_LT(std::abs(ts.scale / lambda - 1.0), 1e-8);
  }
}

TEST(CoarseProperty, WorldFrameInvariance) {
  Scenario s;
  s.seed = 12;
  const auto data = GenerateScenario(s);
  CoarseConfig config;
  config.time_offset = 0.0;
  const CoarseResult base =
      CoarseCalibrate(data.lidar, data.camera_poses, MotionSignal{}, config);

  std::mt19937_64 rng(13);
  const Pose g = RandomPose(rng);
  std::vector<StampedPose> moved_camera = data.camera_poses;
  for (auto& p : moved_camera) p.pose = g * p.pose;
  const CoarseResult camera_moved =
      CoarseCalibrate(data.lidar, moved_camera, MotionSignal{}, config);
  const CoarseResult lidar_moved = CoarseCalibrate(
      data.lidar.LeftMultiplied(RandomPose(rng)), data.camera_poses,
      MotionSignal{}, config);
  for (const auto* other : {&camera_moved, &lidar_moved}) {
    EXPECT_LT(MaxAbsDiff(other->extrinsic.matrix(), base.extrinsic.matrix()),
              1e-12);
    EXPECT_NEAR(other->scale, base.scale, 1e-12);
  }
}

TEST(CoarseProperty, ScaleEquivariance) {
  Scenario s;
  s.seed = 14;
  const auto data = GenerateScenario(s);
  CoarseConfig config;
  config.time_offset = 0.0;
  const CoarseResult base =
      CoarseCalibrate(data.lidar, data.camera_poses, MotionSignal{}, config);
  const double factor = 3.5;
  std::vector<StampedPose> scaled = data.camera_poses;
  for (auto& p : scaled) {
    p.pose = Pose(p.pose.rotation(), factor * p.pose.translation());
  }
  const CoarseResult result =
      CoarseCalibrate(data.lidar, scaled, MotionSignal{}, config);
  EXPECT_LT(RotationDistance(result.extrinsic.rotation(), base.extrinsic.rotation()),
            1e-10);
  EXPECT_LT((result.extrinsic.translation() - base.extrinsic.translation()).norm(),
            1e-10);
  EXPECT_NEAR(result.scale * factor, base.scale, 1e-10 * base.scale);
}

TEST(CoarseCalibrateTest, DefaultScenarioAccuracy) {
  Scenario s;
  s.seed = 15;
  const auto data = GenerateScenario(s);
  CoarseConfig config;
  config.time_offset = s.time_lag;
  const CoarseResult result =
      CoarseCalibrate(data.lidar, data.camera_poses, MotionSignal{}, config);
  const ErrorMetrics m = Evaluate(result.extrinsic, 0.0, data.truth);
  EXPECT_LT(m.e_r, 0.02);
  EXPECT_LT(m.e_t, 0.05);
  EXPECT_GT(result.scale, 0.0);
  EXPECT_EQ(result.pair_count, 10);
}

TEST(CoarseCalibrateTest, StationaryInputsFailAtRoughSync) {
  std::vector<StampedPose> knots, camera;
  for (int i = 0; i < 200; ++i) knots.push_back({0.01 * i, Pose()});
  for (int i = 0; i < 40; ++i) camera.push_back({0.05 * i, Pose()});
  MotionSignal still;
  for (const auto& c : camera) {
    still.timestamps.push_back(c.timestamp);
    still.magnitudes.push_back(0.0);
  }
  try {
    CoarseCalibrate(ContinuousTrajectory(knots), camera, still);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kOnsetNotFound);
    EXPECT_EQ(e.stage(), Stage::kRoughSync);
  }
}

}  // namespace
}  // namespace ctcalib
