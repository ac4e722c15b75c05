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

#include "ctcalib/reprojection.h"

namespace ctcalib {

CalibrationState CalibrationState::FromLidarFromCamera(
    const Pose& lidar_from_camera, double tau) {
  return CalibrationState{LogMap(lidar_from_camera.inverse()), tau};
}

Pose CameraPoseInWorld(const Pose& camera_from_lidar, double tau,
                       double frame_time, const ContinuousTrajectory& lidar) {
  return lidar.Interpolate(frame_time + tau) * camera_from_lidar.inverse();
}

Reprojection ReprojectionResidual(const Pose& camera_from_lidar, double tau,
                                  double frame_time,
                                  const Eigen::Vector2d& pixel,
                                  const Eigen::Vector3d& landmark,
                                  const ContinuousTrajectory& lidar,
                                  const CameraIntrinsics& intrinsics,
                                  ResidualJacobians* jacobians) {
  const double t = frame_time + tau;
  const Pose lidar_from_world = lidar.Interpolate(t).inverse();
  const Eigen::Vector3d p_lidar = lidar_from_world * landmark;
  const Eigen::Vector3d p_camera = camera_from_lidar * p_lidar;

  Reprojection out;
  out.depth = p_camera.z();
  out.valid = p_camera.z() > 0.0;
  if (!out.valid) return out;
  out.residual = pixel - intrinsics.Project(p_camera);

  if (jacobians != nullptr) {
    const Eigen::Matrix<double, 2, 3> dpi =
        intrinsics.ProjectionJacobian(p_camera);
    const Eigen::Matrix3d r_cl = camera_from_lidar.rotation().matrix();
    jacobians->d_xi.leftCols<3>() = dpi * Skew(p_camera);
    jacobians->d_xi.rightCols<3>() = -dpi;
    jacobians->d_landmark =
        -dpi * r_cl * lidar_from_world.rotation().matrix();
    // T_WL(t + d) = T_WL(t) exp(d v)  =>  dp_lidar/dt = -(w x p_lidar + nu).
    const Twist v = lidar.BodyVelocity(t);
    const Eigen::Vector3d p_dot =
        -(v.head<3>().cross(p_lidar) + v.tail<3>());
    jacobians->d_tau = -dpi * r_cl * p_dot;
  }
  return out;
}

}  // namespace ctcalib
