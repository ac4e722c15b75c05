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
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "ctcalib/normal_equations.h"
#include "ctcalib/sim.h"
#include "test_util.h"

namespace ctcalib {
namespace {

// Bundle-adjustment-shaped system H = J^T J + small ridge: every residual
// touches the core and exactly one landmark.
struct DenseSystem {
  Eigen::MatrixXd h;
  Eigen::VectorXd g;
};

DenseSystem RandomSystem(std::mt19937_64& rng, int landmarks,
                         bool zero_tau_column = false) {
  std::normal_distribution<double> n(0.0, 1.0);
  const int dim = kCoreDim + 3 * landmarks;
  const int rows_per_landmark = 6;
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(rows_per_landmark * landmarks, dim);
  for (int l = 0; l < landmarks; ++l) {
    for (int r = 0; r < rows_per_landmark; ++r) {
      const int row = l * rows_per_landmark + r;
      for (int c = 0; c < kCoreDim; ++c) j(row, c) = n(rng);
      for (int c = 0; c < 3; ++c) j(row, kCoreDim + 3 * l + c) = 3.0 * n(rng);
    }
  }
  if (zero_tau_column) j.col(kTauIndex).setZero();
  DenseSystem s;
  s.h = j.transpose() * j;
  s.g = Eigen::VectorXd(dim);
  for (int i = 0; i < dim; ++i) s.g(i) = n(rng);
  if (zero_tau_column) s.g(kTauIndex) = 0.0;
  return s;
}

TEST(SchurProperty, MatchesDenseSolve) {
  std::mt19937_64 rng(51);
  std::uniform_int_distribution<int> count(5, 50);
  for (int trial = 0; trial < 100; ++trial) {
    const int landmarks = count(rng);
    const DenseSystem s = RandomSystem(rng, landmarks);
    const Eigen::VectorXd dense = s.h.ldlt().solve(-s.g);
    const Eigen::VectorXd schur = SchurSolve(s.h, s.g, landmarks);
    const double rel = (schur - dense.head<kCoreDim>()).norm() /
                       dense.head<kCoreDim>().norm();
    ASSERT_LT(rel, 1e-9) << "trial " << trial << " landmarks " << landmarks;
  }
}

TEST(SchurTest, ZeroCouplingReducesToCoreSolve) {
  std::mt19937_64 rng(52);
  DenseSystem s = RandomSystem(rng, 4);
  s.h.topRightCorner(kCoreDim, 12).setZero();
  s.h.bottomLeftCorner(12, kCoreDim).setZero();
  const Eigen::VectorXd expected =
      s.h.topLeftCorner(kCoreDim, kCoreDim).ldlt().solve(-s.g.head(kCoreDim));
  EXPECT_LT((SchurSolve(s.h, s.g, 4) - expected).norm(), 1e-12 * expected.norm());
}

TEST(SchurTest, ZeroTauColumnReportsTauNullDirection) {
  std::mt19937_64 rng(53);
  const DenseSystem s = RandomSystem(rng, 6, /*zero_tau_column=*/true);
  try {
    SchurSolve(s.h, s.g, 6);
    FAIL() << "expected an error";
  } catch (const UnobservableCoreError& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnobservableCore);
    EXPECT_NEAR(std::abs(e.null_direction()(kTauIndex)), 1.0, 1e-9);
  }
}

TEST(SchurTest, StructMatchesDenseForm) {
  Scenario s;
  s.seed = 54;
  s.duration = 3.0;
  const auto d = GenerateScenario(s);
  std::vector<LandmarkObservations> landmarks;
  for (std::size_t i = 0; i < 20 && i < d.tracks.size(); ++i) {
    const auto& track = d.tracks[i];
    if (track.observations.size() < 3) continue;
    LandmarkObservations lm;
    lm.landmark_id = track.landmark_id;
    lm.position = d.landmarks[track.landmark_id];
    for (const auto& obs : track.observations) {
      lm.observations.push_back({d.frame_times.at(obs.frame_id), obs.pixel});
    }
    landmarks.push_back(lm);
  }
  const auto state = CalibrationState::FromLidarFromCamera(d.truth.extrinsic, 0.004);
  const auto ne = AssembleNormalEquations(state, landmarks, d.lidar, d.intrinsics,
                                          RobustWeight{});
  const Eigen::MatrixXd h = ne.DenseHessian();
  EXPECT_LT((h - h.transpose()).cwiseAbs().maxCoeff(), 1e-9 * h.norm());
  EXPECT_GT(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(h).eigenvalues()(0),
            -1e-6 * h.norm());
  const CoreVector a = SchurSolve(ne, 1e-3);
  const Eigen::VectorXd b = SchurSolve(h, ne.DenseGradient(),
                                       static_cast<int>(ne.landmarks.size()), 1e-3);
  EXPECT_LT((a - b).norm(), 1e-9 * b.norm());
}

TEST(AssembleTest, SingleResidualIsOuterProduct) {
  Scenario s;
  s.seed = 55;
  s.pixel_noise = 3.0;
  const auto d = GenerateScenario(s);
  const auto& track = d.tracks.front();
  const auto& obs = track.observations.front();
  const double t = d.frame_times.at(obs.frame_id);
  LandmarkObservations lm{track.landmark_id, d.landmarks[track.landmark_id],
                          {{t, obs.pixel}}};
  const auto state = CalibrationState::FromLidarFromCamera(d.truth.extrinsic, 0.0);
  const auto ne = AssembleNormalEquations(state, std::span(&lm, 1), d.lidar,
                                          d.intrinsics, {RobustKernel::kNone});
  ResidualJacobians j;
  const auto r = ReprojectionResidual(state, t, obs.pixel, lm.position, d.lidar,
                                      d.intrinsics, &j);
  Eigen::Matrix<double, 2, kCoreDim + 3> full;
  full << j.d_xi, j.d_tau, j.d_landmark;
  const Eigen::MatrixXd expected = full.transpose() * full;
  EXPECT_LT((ne.DenseHessian() - expected).cwiseAbs().maxCoeff(),
            1e-12 * expected.norm());
  EXPECT_LT((ne.DenseGradient() - full.transpose() * r.residual).norm(),
            1e-12 * (1.0 + expected.norm()));
  Eigen::FullPivLU<Eigen::MatrixXd> lu(ne.DenseHessian());
  lu.setThreshold(1e-10);
  EXPECT_LE(lu.rank(), 2);
}

TEST(AssembleTest, StationaryTrajectoryMakesLagUnobservable) {
  std::vector<StampedPose> knots;
  for (int i = 0; i <= 100; ++i) knots.push_back({0.01 * i, Pose()});
  const ContinuousTrajectory lidar(knots);
  const CameraIntrinsics k;
  std::vector<LandmarkObservations> landmarks;
  std::mt19937_64 rng(56);
  for (int l = 0; l < 10; ++l) {
    LandmarkObservations lm;
    lm.landmark_id = l;
    lm.position = Eigen::Vector3d(0, 0, 6) + testing::RandomVector(rng, 2.0);
    for (double t : {0.2, 0.5, 0.8}) {
      lm.observations.push_back(
          {t, k.Project(lm.position) + testing::RandomVector(rng, 1.0).head<2>()});
    }
    landmarks.push_back(lm);
  }
  const auto ne = AssembleNormalEquations(CalibrationState{}, landmarks, lidar, k,
                                          RobustWeight{});
  EXPECT_EQ(ne.h_cc.row(kTauIndex).norm(), 0.0);
  try {
    SolveTimeLagOnly(MarginalizeLandmarks(ne));
    FAIL() << "expected an error";
  } catch (const UnobservableCoreError& e) {
    EXPECT_EQ(e.null_direction()(kTauIndex), 1.0);
  }
}

TEST(RobustWeightTest, HuberDownweightsLargeResiduals) {
  const RobustWeight huber{RobustKernel::kHuber, 2.0};
  EXPECT_DOUBLE_EQ(huber.Weight(1.0), 1.0);
  EXPECT_LT(huber.Weight(20.0), 1.0);
  EXPECT_DOUBLE_EQ(huber.Cost(1.0), 0.5);
  EXPECT_DOUBLE_EQ(huber.Cost(4.0), 2.0 * (4.0 - 1.0));
}

TEST(RobustWeightTest, CauchyDerivativesMatchFiniteDifferences) {
  const RobustWeight cauchy{RobustKernel::kCauchy, 2.0};
  const double s = 3.0, h = 1e-5;
  const double d1 = (cauchy.Cost(s + h) - cauchy.Cost(s - h)) / (2 * h);
  const double d2 =
      (cauchy.Cost(s + h) - 2 * cauchy.Cost(s) + cauchy.Cost(s - h)) / (h * h);
  EXPECT_NEAR(cauchy.Weight(s) * s, d1, 1e-8);
  EXPECT_NEAR(cauchy.Curvature(s), d2, 1e-4);
}

}  // namespace
}  // namespace ctcalib
