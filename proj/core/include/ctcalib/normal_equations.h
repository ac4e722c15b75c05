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

#ifndef CTCALIB_NORMAL_EQUATIONS_H_
#define CTCALIB_NORMAL_EQUATIONS_H_

#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "ctcalib/camera.h"
#include "ctcalib/error.h"
#include "ctcalib/reprojection.h"
#include "ctcalib/robust.h"
#include "ctcalib/trajectory.h"

namespace ctcalib {

// Core parameter block: 6 extrinsic + 1 time lag.
inline constexpr int kCoreDim = 7;
inline constexpr int kTauIndex = 6;

using CoreVector = Eigen::Matrix<double, kCoreDim, 1>;
using CoreMatrix = Eigen::Matrix<double, kCoreDim, kCoreDim>;

struct TimedObservation {
  double frame_time = 0.0;  // camera clock
  Eigen::Vector2d pixel = Eigen::Vector2d::Zero();
};

struct LandmarkObservations {
  int landmark_id = 0;
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  std::vector<TimedObservation> observations;
};

struct LandmarkBlock {
  int landmark_id = 0;
  Eigen::Matrix3d h_ss = Eigen::Matrix3d::Zero();
  Eigen::Matrix<double, kCoreDim, 3> h_cs =
      Eigen::Matrix<double, kCoreDim, 3>::Zero();
  Eigen::Vector3d g_s = Eigen::Vector3d::Zero();
};

// Block-structured Gauss-Newton system H = J^T W J, g = J^T W e ordered as
// [xi (6), tau (1), landmark_0 (3), landmark_1 (3), ...]. Landmarks only
// couple with the core block.
struct NormalEquations {
  CoreMatrix h_cc = CoreMatrix::Zero();
  CoreVector g_c = CoreVector::Zero();
  std::vector<LandmarkBlock> landmarks;
  double cost = 0.0;
  int residual_count = 0;  // valid residuals
  int invalid_count = 0;   // non-positive depth, zero weight
  int excluded_count = 0;  // outside the trajectory span

  Eigen::MatrixXd DenseHessian() const;
  Eigen::VectorXd DenseGradient() const;
};

// Throws kNoConstraints when no residual is valid.
NormalEquations AssembleNormalEquations(
    const CalibrationState& state,
    std::span<const LandmarkObservations> landmarks,
    const ContinuousTrajectory& lidar, const CameraIntrinsics& intrinsics,
    const RobustWeight& robust);

// Core system after eliminating every landmark.
struct ReducedSystem {
  CoreMatrix h = CoreMatrix::Zero();
  CoreVector g = CoreVector::Zero();
};

ReducedSystem MarginalizeLandmarks(const NormalEquations& system);

class UnobservableCoreError : public Error {
 public:
  UnobservableCoreError(const std::string& message,
                        Eigen::VectorXd null_direction)
      : Error(ErrorCode::kUnobservableCore, message),
        null_direction_(std::move(null_direction)) {}
  const Eigen::VectorXd& null_direction() const { return null_direction_; }

 private:
  Eigen::VectorXd null_direction_;
};

// Solves (H_bar + damping I) dx = -g_bar. Throws UnobservableCoreError when
// the damped reduced matrix is numerically singular.
CoreVector SolveCore(const ReducedSystem& reduced, double damping = 0.0);

// Schur-complement update of the core block.
CoreVector SchurSolve(const NormalEquations& system, double damping = 0.0);

// Dense form: the trailing 3 * landmark_count rows of `h` are landmarks with
// 3x3 block-diagonal H_ss; the leading rows form the core.
Eigen::VectorXd SchurSolve(const Eigen::MatrixXd& h, const Eigen::VectorXd& g,
                           int landmark_count, double damping = 0.0);

// Time-lag step with the extrinsic additionally marginalized out of the
// reduced system.
double SolveTimeLagOnly(const ReducedSystem& reduced, double damping = 0.0);

}  // namespace ctcalib

#endif  // CTCALIB_NORMAL_EQUATIONS_H_
