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

#include "ctcalib/triangulation.h"

#include <algorithm>
#include <cmath>

#include <Eigen/Cholesky>
#include <Eigen/SVD>

#include "ctcalib/error.h"

namespace ctcalib {

Landmark Triangulate(std::span<const Eigen::Vector2d> pixels,
                     std::span<const Pose> world_from_camera,
                     const CameraIntrinsics& intrinsics, double min_angle) {
  if (pixels.size() != world_from_camera.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "one camera pose per observation is required");
  }
  if (pixels.size() < 2) {
    throw Error(ErrorCode::kInvalidArgument,
                "triangulation needs at least two observations");
  }
  const auto n = static_cast<Eigen::Index>(pixels.size());
  Eigen::MatrixXd a(2 * n, 4);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Pose camera_from_world = world_from_camera[i].inverse();
    Eigen::Matrix<double, 3, 4> p;
    p.leftCols<3>() = camera_from_world.rotation().matrix();
    p.col(3) = camera_from_world.translation();
    const Eigen::Vector3d x = intrinsics.Unproject(pixels[i]);
    a.row(2 * i) = x.x() * p.row(2) - p.row(0);
    a.row(2 * i + 1) = x.y() * p.row(2) - p.row(1);
  }
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    const double norm = a.row(r).norm();
    if (norm > 0.0) a.row(r) /= norm;
  }
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
  const Eigen::Vector4d h = svd.matrixV().col(3);
  if (std::abs(h(3)) <= 1e-12 * h.head<3>().norm()) {
    throw Error(ErrorCode::kLowParallax, "triangulated point at infinity");
  }
  const Eigen::Vector3d point = h.head<3>() / h(3);

  double max_angle = 0.0;
  int in_front = 0;
  std::vector<Eigen::Vector3d> rays;
  rays.reserve(pixels.size());
  for (const Pose& pose : world_from_camera) {
    rays.push_back((point - pose.translation()).normalized());
    if ((pose.inverse() * point).z() > 0.0) ++in_front;
  }
  for (std::size_t i = 0; i < rays.size(); ++i) {
    for (std::size_t j = i + 1; j < rays.size(); ++j) {
      const double angle =
          std::atan2(rays[i].cross(rays[j]).norm(), rays[i].dot(rays[j]));
      max_angle = std::max(max_angle, angle);
    }
  }
  if (!(max_angle >= min_angle)) {
    throw Error(ErrorCode::kLowParallax,
                "triangulation angle " + std::to_string(max_angle) +
                    " rad below minimum");
  }
  if (in_front < 2) {
    throw Error(ErrorCode::kCheirality,
                "triangulated point is behind the observing cameras");
  }
  return Landmark{point};
}

Landmark Triangulate(const FeatureTrack& track,
                     const std::vector<Pose>& frame_poses,
                     const CameraIntrinsics& intrinsics, double min_angle) {
  std::vector<Eigen::Vector2d> pixels;
  pixels.reserve(track.observations.size());
  for (const auto& obs : track.observations) pixels.push_back(obs.pixel);
  return Triangulate(pixels, frame_poses, intrinsics, min_angle);
}

namespace {

struct PolishModel {
  double cost = 0.0;
  int valid = 0;
  Eigen::Matrix3d h = Eigen::Matrix3d::Zero();
  Eigen::Vector3d g = Eigen::Vector3d::Zero();
};

PolishModel EvaluatePolish(const Eigen::Vector3d& point,
                           std::span<const Eigen::Vector2d> pixels,
                           const std::vector<Pose>& camera_from_world,
                           const CameraIntrinsics& intrinsics,
                           const RobustWeight& robust, bool derivatives) {
  PolishModel m;
  for (std::size_t i = 0; i < pixels.size(); ++i) {
    const Eigen::Vector3d pc = camera_from_world[i] * point;
    if (!(pc.z() > 0.0)) continue;
    ++m.valid;
    const Eigen::Vector2d e = pixels[i] - intrinsics.Project(pc);
    const double s = e.norm();
    m.cost += robust.Cost(s);
    if (!derivatives) continue;
    const Eigen::Matrix<double, 2, 3> j =
        -intrinsics.ProjectionJacobian(pc) *
        camera_from_world[i].rotation().matrix();
    const double w = robust.Weight(s);
    // Hessian of rho(|e|) w.r.t. e: w (I - u u^T) + rho'' u u^T, with the
    // radial curvature clamped at zero.
    Eigen::Matrix2d weight = w * Eigen::Matrix2d::Identity();
    if (s > 1e-12) {
      const Eigen::Vector2d u = e / s;
      weight += (std::max(robust.Curvature(s), 0.0) - w) * u * u.transpose();
    }
    m.h += j.transpose() * weight * j;
    m.g += w * j.transpose() * e;
  }
  return m;
}

}  // namespace

Eigen::Vector3d PolishLandmark(const Eigen::Vector3d& initial,
                               std::span<const Eigen::Vector2d> pixels,
                               std::span<const Pose> world_from_camera,
                               const CameraIntrinsics& intrinsics,
                               const RobustWeight& robust, int max_iterations) {
  std::vector<Pose> camera_from_world;
  camera_from_world.reserve(world_from_camera.size());
  for (const Pose& p : world_from_camera) camera_from_world.push_back(p.inverse());

  Eigen::Vector3d point = initial;
  PolishModel current =
      EvaluatePolish(point, pixels, camera_from_world, intrinsics, robust, true);
  double lambda = 1e-9;
  for (int it = 0; it < max_iterations; ++it) {
    const double diag = std::max(current.h.diagonal().maxCoeff(), 1e-300);
    Eigen::Matrix3d damped = current.h;
    damped.diagonal().array() += lambda * diag;
    const Eigen::LDLT<Eigen::Matrix3d> ldlt(damped);
    if (ldlt.info() != Eigen::Success) break;
    const Eigen::Vector3d step = -ldlt.solve(current.g);
    if (!step.allFinite()) break;
    if (step.norm() <= 1e-13 * (1.0 + point.norm())) break;
    const Eigen::Vector3d candidate = point + step;
    const PolishModel next = EvaluatePolish(candidate, pixels, camera_from_world,
                                            intrinsics, robust, false);
    if (next.valid >= current.valid && next.cost <= current.cost) {
      point = candidate;
      current = EvaluatePolish(point, pixels, camera_from_world, intrinsics,
                               robust, true);
      lambda = std::max(lambda * 0.1, 1e-12);
    } else {
      lambda *= 10.0;
      if (lambda > 1e12) break;
    }
  }
  return point;
}

}  // namespace ctcalib
