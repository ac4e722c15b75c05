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

#include "ctcalib/geometry.h"

#include <cmath>

#include <Eigen/SVD>

#include "ctcalib/error.h"

namespace ctcalib {
namespace {

// (1 - cos t) / t^2 without cancellation.
double OneMinusCosOverSq(double theta) {
  const double s = std::sin(0.5 * theta) / theta;
  return 2.0 * s * s;
}

}  // namespace

Eigen::Matrix3d Skew(const Eigen::Vector3d& v) {
  Eigen::Matrix3d s;
  // clang-format off
  s <<    0.0, -v.z(),  v.y(),
        v.z(),    0.0, -v.x(),
       -v.y(),  v.x(),    0.0;
  // clang-format on
  return s;
}

Rotation Rotation::FromQuaternion(const Eigen::Quaterniond& q) {
  const double n = q.norm();
  if (!std::isfinite(n) || n == 0.0) {
    throw Error(ErrorCode::kInvalidArgument, "quaternion has zero norm");
  }
  return Rotation(Eigen::Quaterniond(q.coeffs() / n));
}

Rotation Rotation::ProjectFromMatrix(const Eigen::Matrix3d& m) {
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(m,
                                        Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d d = Eigen::Matrix3d::Identity();
  d(2, 2) = (svd.matrixU() * svd.matrixV().transpose()).determinant() < 0.0
                ? -1.0
                : 1.0;
  const Eigen::Matrix3d r = svd.matrixU() * d * svd.matrixV().transpose();
  return Rotation(Eigen::Quaterniond(r).normalized());
}

Rotation Rotation::FromMatrix(const Eigen::Matrix3d& m) {
  if (!m.allFinite()) {
    throw Error(ErrorCode::kInvalidArgument, "rotation matrix is not finite");
  }
  const double orth =
      (m * m.transpose() - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  if (orth > 1e-6 || m.determinant() < 0.0) {
    throw Error(ErrorCode::kInvalidArgument,
                "matrix is not a proper rotation");
  }
  return ProjectFromMatrix(m);
}

Rotation Rotation::Exp(const Eigen::Vector3d& r) {
  if (!r.allFinite()) {
    throw Error(ErrorCode::kInvalidArgument, "rotation vector is not finite");
  }
  const double theta_sq = r.squaredNorm();
  const double theta = std::sqrt(theta_sq);
  Eigen::Quaterniond q;
  if (theta < kSmallAngle) {
    q.w() = 1.0 - theta_sq / 8.0;
    q.vec() = 0.5 * (1.0 - theta_sq / 24.0) * r;
  } else {
    q.w() = std::cos(0.5 * theta);
    q.vec() = (std::sin(0.5 * theta) / theta) * r;
  }
  return Rotation(q.normalized());
}

Eigen::Vector3d Rotation::Log() const {
  Eigen::Quaterniond q = q_;
  if (q.w() < 0.0) q.coeffs() = -q.coeffs();
  const double n = q.vec().norm();
  const double w = q.w();
  if (n < 0.5 * kSmallAngle) {
    // atan(n / w) / n ~ (1 - n^2 / (3 w^2)) / w
    return (2.0 / w) * (1.0 - n * n / (3.0 * w * w)) * q.vec();
  }
  return (2.0 * std::atan2(n, w) / n) * q.vec();
}

double Rotation::angle() const {
  const double n = q_.vec().norm();
  return 2.0 * std::atan2(n, std::abs(q_.w()));
}

Rotation Rotation::operator*(const Rotation& other) const {
  return Rotation((q_ * other.q_).normalized());
}

Pose Pose::FromMatrix(const Eigen::Matrix4d& m) {
  return Pose(Rotation::FromMatrix(m.topLeftCorner<3, 3>()),
              m.topRightCorner<3, 1>());
}

Eigen::Matrix4d Pose::matrix() const {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = rotation_.matrix();
  m.topRightCorner<3, 1>() = translation_;
  return m;
}

Pose Pose::inverse() const {
  const Rotation inv = rotation_.inverse();
  return Pose(inv, -(inv * translation_));
}

Pose Pose::operator*(const Pose& other) const {
  return Pose(rotation_ * other.rotation_,
              rotation_ * other.translation_ + translation_);
}

Eigen::Matrix3d LeftJacobianSO3(const Eigen::Vector3d& r) {
  const double theta = r.norm();
  const Eigen::Matrix3d k = Skew(r);
  if (theta < kSmallAngle) {
    return Eigen::Matrix3d::Identity() + 0.5 * k + (1.0 / 6.0) * k * k;
  }
  const double a = OneMinusCosOverSq(theta);
  const double b = (theta - std::sin(theta)) / (theta * theta * theta);
  return Eigen::Matrix3d::Identity() + a * k + b * k * k;
}

Eigen::Matrix3d LeftJacobianInverseSO3(const Eigen::Vector3d& r) {
  const double theta = r.norm();
  const Eigen::Matrix3d k = Skew(r);
  if (theta < kSmallAngle) {
    return Eigen::Matrix3d::Identity() - 0.5 * k + (1.0 / 12.0) * k * k;
  }
  const double half = 0.5 * theta;
  const double c = (1.0 - half * std::cos(half) / std::sin(half)) /
                   (theta * theta);
  return Eigen::Matrix3d::Identity() - 0.5 * k + c * k * k;
}

Pose ExpMap(const Twist& xi) {
  if (!xi.allFinite()) {
    throw Error(ErrorCode::kInvalidArgument, "twist is not finite");
  }
  const Eigen::Vector3d r = xi.head<3>();
  return Pose(Rotation::Exp(r), LeftJacobianSO3(r) * xi.tail<3>());
}

Twist LogMap(const Pose& pose) {
  const Eigen::Vector3d r = pose.rotation().Log();
  if (r.norm() > M_PI - kHalfTurnMargin) {
    throw Error(ErrorCode::kDegenerateRotation,
                "log of a rotation within 1e-6 rad of pi is ambiguous");
  }
  Twist xi;
  xi.head<3>() = r;
  xi.tail<3>() = LeftJacobianInverseSO3(r) * pose.translation();
  return xi;
}

Pose RelativePose(const Pose& a, const Pose& b) { return a.inverse() * b; }

double RotationDistance(const Rotation& a, const Rotation& b) {
  return (a.inverse() * b).angle();
}

}  // namespace ctcalib
