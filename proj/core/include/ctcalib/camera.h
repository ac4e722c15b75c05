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

#ifndef CTCALIB_CAMERA_H_
#define CTCALIB_CAMERA_H_

#include <map>
#include <vector>

#include <Eigen/Core>

namespace ctcalib {

// Rectified pinhole camera.
struct CameraIntrinsics {
  double fx = 700.0;
  double fy = 700.0;
  double cx = 640.0;
  double cy = 360.0;
  int width = 1280;
  int height = 720;

  // Throws kInvalidArgument unless fx, fy > 0 and the principal point lies
  // inside the image.
  void Validate() const;

  Eigen::Vector2d Project(const Eigen::Vector3d& p_camera) const {
    return {fx * p_camera.x() / p_camera.z() + cx,
            fy * p_camera.y() / p_camera.z() + cy};
  }
  // d Project / d p_camera.
  Eigen::Matrix<double, 2, 3> ProjectionJacobian(
      const Eigen::Vector3d& p_camera) const;
  // Unit-depth ray (x/z, y/z, 1) for a pixel.
  Eigen::Vector3d Unproject(const Eigen::Vector2d& pixel) const {
    return {(pixel.x() - cx) / fx, (pixel.y() - cy) / fy, 1.0};
  }
  bool InImage(const Eigen::Vector2d& pixel) const {
    return pixel.x() >= 0.0 && pixel.y() >= 0.0 && pixel.x() < width &&
           pixel.y() < height;
  }
};

struct Observation {
  int frame_id = 0;
  Eigen::Vector2d pixel = Eigen::Vector2d::Zero();
};

struct FeatureTrack {
  int landmark_id = 0;
  std::vector<Observation> observations;  // at most one per frame
};

// frame_id -> timestamp on the camera clock.
using FrameTimestamps = std::map<int, double>;

}  // namespace ctcalib

#endif  // CTCALIB_CAMERA_H_
