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

#ifndef CTCALIB_REPROJECTION_H_
#define CTCALIB_REPROJECTION_H_

#include <Eigen/Core>

#include "ctcalib/camera.h"
#include "ctcalib/geometry.h"
#include "ctcalib/trajectory.h"

namespace ctcalib {

// Spatiotemporal calibration parameters. The extrinsic is stored as the
// camera-from-LiDAR twist; frame i taken at camera time t_i sees the LiDAR
// pose at t_i + tau.
struct CalibrationState {
  Twist xi = Twist::Zero();
  double tau = 0.0;  // seconds

  Pose camera_from_lidar() const { return ExpMap(xi); }
  Pose lidar_from_camera() const { return ExpMap(xi).inverse(); }
  static CalibrationState FromLidarFromCamera(const Pose& lidar_from_camera,
                                              double tau);
};

// Derivatives of the residual. The extrinsic derivative is taken w.r.t. a
// left perturbation exp(d) * T_CL, matching the solver update.
struct ResidualJacobians {
  Eigen::Matrix<double, 2, 6> d_xi;
  Eigen::Vector2d d_tau;
  Eigen::Matrix<double, 2, 3> d_landmark;
};

struct Reprojection {
  Eigen::Vector2d residual = Eigen::Vector2d::Zero();  // observed - predicted
  double depth = 0.0;
  bool valid = false;  // false when the point is not in front of the camera
};

// Residual of one observation: pixel - project(T_CL * T_LW(t + tau) * p_w).
// Throws kOutOfRange when t + tau leaves the trajectory span.
Reprojection ReprojectionResidual(const Pose& camera_from_lidar, double tau,
                                  double frame_time,
                                  const Eigen::Vector2d& pixel,
                                  const Eigen::Vector3d& landmark,
                                  const ContinuousTrajectory& lidar,
                                  const CameraIntrinsics& intrinsics,
                                  ResidualJacobians* jacobians = nullptr);

inline Reprojection ReprojectionResidual(const CalibrationState& state,
                                         double frame_time,
                                         const Eigen::Vector2d& pixel,
                                         const Eigen::Vector3d& landmark,
                                         const ContinuousTrajectory& lidar,
                                         const CameraIntrinsics& intrinsics,
                                         ResidualJacobians* jacobians = nullptr) {
  return ReprojectionResidual(state.camera_from_lidar(), state.tau, frame_time,
                              pixel, landmark, lidar, intrinsics, jacobians);
}

// World-from-camera pose of a frame under the given calibration.
Pose CameraPoseInWorld(const Pose& camera_from_lidar, double tau,
                       double frame_time, const ContinuousTrajectory& lidar);

}  // namespace ctcalib

#endif  // CTCALIB_REPROJECTION_H_
