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

#include "ctcalib/camera.h"

#include "ctcalib/error.h"

namespace ctcalib {

void CameraIntrinsics::Validate() const {
  if (!(fx > 0.0) || !(fy > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "focal lengths must be positive");
  }
  if (width <= 0 || height <= 0 || !(cx >= 0.0) || !(cy >= 0.0) ||
      !(cx < width) || !(cy < height)) {
    throw Error(ErrorCode::kInvalidArgument,
                "principal point must lie inside the image");
  }
}

Eigen::Matrix<double, 2, 3> CameraIntrinsics::ProjectionJacobian(
    const Eigen::Vector3d& p) const {
  const double inv_z = 1.0 / p.z();
  Eigen::Matrix<double, 2, 3> j;
  j << fx * inv_z, 0.0, -fx * p.x() * inv_z * inv_z,  //
      0.0, fy * inv_z, -fy * p.y() * inv_z * inv_z;
  return j;
}

}  // namespace ctcalib
