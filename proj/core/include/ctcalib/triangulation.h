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

#ifndef CTCALIB_TRIANGULATION_H_
#define CTCALIB_TRIANGULATION_H_

#include <span>
#include <vector>

#include <Eigen/Core>

#include "ctcalib/camera.h"
#include "ctcalib/geometry.h"
#include "ctcalib/robust.h"

namespace ctcalib {

struct Landmark {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();  // world frame, meters
};

inline constexpr double kDefaultMinTriangulationAngle = 0.5 * M_PI / 180.0;

// Linear (DLT) triangulation from pixels and the world-from-camera poses of
// the observing frames. Throws kLowParallax when the largest angle between
// viewing rays is below `min_angle` (radians) and kCheirality when the point
// lies in front of fewer than two cameras.
Landmark Triangulate(std::span<const Eigen::Vector2d> pixels,
                     std::span<const Pose> world_from_camera,
                     const CameraIntrinsics& intrinsics,
                     double min_angle = kDefaultMinTriangulationAngle);

// Track overload; `frame_poses[k]` belongs to `track.observations[k]`.
Landmark Triangulate(const FeatureTrack& track,
                     const std::vector<Pose>& frame_poses,
                     const CameraIntrinsics& intrinsics,
                     double min_angle = kDefaultMinTriangulationAngle);

// Minimizes the (robust) reprojection error of one landmark with the camera
// poses held fixed, starting from `initial`. Uses damped Newton steps on the
// exact robust loss so the result is a stationary point, not an IRLS iterate.
// Observations behind a camera are ignored, and no step may move the point
// behind a camera that currently sees it in front.
Eigen::Vector3d PolishLandmark(const Eigen::Vector3d& initial,
                               std::span<const Eigen::Vector2d> pixels,
                               std::span<const Pose> world_from_camera,
                               const CameraIntrinsics& intrinsics,
                               const RobustWeight& robust = {RobustKernel::kNone},
                               int max_iterations = 50);

}  // namespace ctcalib

#endif  // CTCALIB_TRIANGULATION_H_
